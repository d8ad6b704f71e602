#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "newsalpha/artifacts.hpp"
#include "newsalpha/corpus.hpp"
#include "newsalpha/errors.hpp"
#include "newsalpha/synthetic.hpp"

using namespace newsalpha;
namespace fs = std::filesystem;

namespace {

SyntheticSpec tiny(std::uint64_t seed = 11) {
    SyntheticSpec s;
    s.seed = seed;
    s.n_stocks = 12;
    s.n_days = 15;
    s.headlines_per_day = 10;
    s.vocabulary_size = 200;
    return s;
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("newsalpha_synth_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("spec validation") {
    CHECK_NOTHROW(SyntheticSpec::strong_signal().validate());
    CHECK(SyntheticSpec::zero_signal().effect_size == 0);
    auto s = tiny();
    s.negative_words.push_back("buy");
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = tiny();
    s.effect_size = -0.1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = tiny();
    s.n_stocks = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("identical specs give byte-identical files") {
    auto a = write_synthetic(generate(tiny()), scratch("a"));
    auto b = write_synthetic(generate(tiny()), scratch("b"));
    CHECK(sha256_file(a.news) == sha256_file(b.news));
    CHECK(sha256_file(a.daily_prices) == sha256_file(b.daily_prices));
    CHECK(sha256_file(a.minute_prices) == sha256_file(b.minute_prices));
    CHECK(sha256_file(a.calendar) == sha256_file(b.calendar));
    auto c = write_synthetic(generate(tiny(12)), scratch("c"));
    CHECK(sha256_file(a.news) != sha256_file(c.news));
}

TEST_CASE("news shape") {
    auto spec = tiny();
    auto corpus = generate(spec);
    CHECK(corpus.news.size() == static_cast<std::size_t>(spec.n_days * spec.headlines_per_day));
    CHECK(corpus.market_instrument == kSyntheticIndex);
    std::set<std::string> vocab;
    for (const auto& w : synthetic_vocabulary(spec)) vocab.insert(w);
    for (std::size_t i = 0; i < corpus.news.size(); ++i) {
        const auto& n = corpus.news[i];
        CHECK(n.id == i + 1);
        if (i) CHECK(n.timestamp >= corpus.news[i - 1].timestamp);
        CHECK(corpus.prices.contains(n.ticker));
        CHECK(std::isupper(static_cast<unsigned char>(n.headline[0])));
        for (const auto& t : tokenize(n.headline)) CHECK(vocab.contains(t));
    }
}

TEST_CASE("prices are positive and the index is the equal-weight mean") {
    auto spec = tiny(5);
    auto corpus = generate(spec);
    REQUIRE(corpus.prices.size() == static_cast<std::size_t>(spec.n_stocks + 1));
    const auto& index = corpus.prices.at(kSyntheticIndex);
    std::map<Instant, double> minute_sum;
    std::map<Date, double> daily_sum;
    for (const auto& [name, s] : corpus.prices) {
        CHECK_NOTHROW(validate_price_series(s));
        for (const auto& p : s.minute_bars) CHECK(p.price > 0);
        for (const auto& [d, c] : s.daily_closes) CHECK(c > 0);
        if (name == kSyntheticIndex) continue;
        for (const auto& p : s.minute_bars) minute_sum[p.time] += p.price;
        for (const auto& [d, c] : s.daily_closes) daily_sum[d] += c;
    }
    REQUIRE(index.minute_bars.size() == minute_sum.size());
    for (const auto& p : index.minute_bars) {
        CHECK(std::abs(p.price - minute_sum.at(p.time) / spec.n_stocks) <= 1e-9 * p.price);
    }
    for (const auto& [d, c] : index.daily_closes) CHECK(std::abs(c - daily_sum.at(d) / spec.n_stocks) <= 1e-9 * c);
    // Two extra sessions of prices beyond the news.
    CHECK(index.daily_closes.size() == static_cast<std::size_t>(spec.n_days + 2));
    // The daily close is the last bar of its session.
    for (const auto& [d, c] : index.daily_closes) {
        auto it = std::find_if(index.minute_bars.begin(), index.minute_bars.end(),
                               [&](const PricePoint& p) { return p.time == corpus.calendar.close_instant(d); });
        REQUIRE(it != index.minute_bars.end());
        CHECK(it->price == c);
    }
}

TEST_CASE("static table and stand-in layer embeddings") {
    auto spec = tiny();
    auto vocab = synthetic_vocabulary(spec);
    auto table = random_static_table(vocab, 8, 3);
    CHECK(table.size() == vocab.size());
    CHECK(table.dimension() == 8);
    auto again = random_static_table(vocab, 8, 3);
    CHECK(*again.find(vocab[0]) == *table.find(vocab[0]));

    auto corpus = generate(spec);
    auto emb = synthetic_layer_embeddings(corpus.news, table, 12);
    REQUIRE(emb.size() == corpus.news.size());
    for (const auto& e : emb) {
        CHECK(e.rows == 31);
        CHECK(e.cols == 8);
        CHECK(e.layer == 12);
        CHECK(e.source == EmbeddingSource::Tuned);
        CHECK_NOTHROW(validate_embedding(e));
    }
    CHECK_THROWS_AS(synthetic_layer_embeddings(corpus.news, table, 0), ConfigError);
}
