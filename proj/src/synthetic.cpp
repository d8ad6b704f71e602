#include "newsalpha/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "newsalpha/errors.hpp"
#include "newsalpha/evaluation.hpp"
#include "newsalpha/random.hpp"

namespace newsalpha {

namespace chr = std::chrono;

namespace {

constexpr int kBarsPerDay = 18;  // 09:00 .. 17:30 every 30 minutes
constexpr std::uint64_t kNewsStream = 0x6e657773ULL;
constexpr std::uint64_t kPriceStream = 0x70726963ULL;

std::string background_word(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "w%04d", i + 1);
    return buf;
}

std::string ticker_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "S%03d", i + 1);
    return buf;
}

TradingCalendar synthetic_calendar() {
    TradingCalendar cal;
    cal.zone = TimeZone::named("Europe/Paris");
    return cal;
}

}  // namespace

SyntheticSpec SyntheticSpec::strong_signal() { return {}; }

SyntheticSpec SyntheticSpec::zero_signal() {
    SyntheticSpec s;
    s.effect_size = 0;
    return s;
}

void SyntheticSpec::validate() const {
    if (n_stocks <= 0 || n_days <= 0 || headlines_per_day <= 0 || vocabulary_size <= 0) {
        throw ConfigError("synthetic sizes must be positive");
    }
    if (headlines_per_day > n_stocks) throw ConfigError("headlines_per_day cannot exceed n_stocks");
    if (positive_words.empty() || negative_words.empty()) throw ConfigError("signal word lists must be non-empty");
    std::set<std::string> pos(positive_words.begin(), positive_words.end());
    for (const auto& w : negative_words) {
        if (pos.contains(w)) throw ConfigError("signal word lists overlap on '" + w + "'");
    }
    if (!(effect_size >= 0)) throw ConfigError("effect size must be non-negative");
    if (!(noise_volatility >= 0)) throw ConfigError("noise volatility must be non-negative");
    if (!(signal_probability >= 0 && signal_probability <= 1) ||
        !(out_of_hours_fraction >= 0 && out_of_hours_fraction <= 1)) {
        throw ConfigError("probabilities must lie in [0, 1]");
    }
    if (min_words <= 0 || max_words < min_words) throw ConfigError("bad headline length range");
}

std::vector<std::string> synthetic_vocabulary(const SyntheticSpec& spec) {
    std::vector<std::string> vocab;
    for (int i = 0; i < spec.vocabulary_size; ++i) vocab.push_back(background_word(i));
    vocab.insert(vocab.end(), spec.positive_words.begin(), spec.positive_words.end());
    vocab.insert(vocab.end(), spec.negative_words.begin(), spec.negative_words.end());
    for (const auto& w : default_stopwords()) vocab.push_back(w);
    return vocab;
}

SyntheticCorpus generate(const SyntheticSpec& spec) {
    spec.validate();
    SyntheticCorpus out;
    out.calendar = synthetic_calendar();
    const auto& cal = out.calendar;

    const int total_days = spec.n_days + 2;
    std::vector<Date> days;
    Date d = cal.is_trading_day(spec.start_date) ? spec.start_date : cal.next_trading_day(spec.start_date);
    for (int i = 0; i < total_days; ++i, d = cal.next_trading_day(d)) days.push_back(d);

    const std::size_t S = static_cast<std::size_t>(spec.n_stocks);
    // Log-return shock per (day, increment, stock). Increment 0 is the
    // overnight move into the 09:00 bar; increment j moves bar j-1 to bar j.
    std::vector<double> shock(static_cast<std::size_t>(total_days) * kBarsPerDay * S, 0.0);
    auto shock_at = [&](int day, int inc, std::size_t stock) -> double& {
        return shock[(static_cast<std::size_t>(day) * kBarsPerDay + static_cast<std::size_t>(inc)) * S + stock];
    };

    std::vector<std::string> stop_list(default_stopwords().begin(), default_stopwords().end());
    SplitMix64 rng(spec.seed ^ kNewsStream);
    std::vector<std::size_t> stocks(S);
    for (int day = 0; day < spec.n_days; ++day) {
        std::iota(stocks.begin(), stocks.end(), std::size_t{0});
        // Partial Fisher-Yates: the first headlines_per_day entries are a distinct sample.
        for (std::size_t i = 0; i < static_cast<std::size_t>(spec.headlines_per_day); ++i) {
            std::swap(stocks[i], stocks[i + rng.below(S - i)]);
        }
        std::vector<NewsItem> today;
        for (int h = 0; h < spec.headlines_per_day; ++h) {
            std::size_t stock = stocks[static_cast<std::size_t>(h)];
            bool out_of_hours = rng.uniform() < spec.out_of_hours_fraction;
            chr::milliseconds tod;
            int shock_inc;
            if (out_of_hours) {
                tod = chr::hours(7) + chr::milliseconds(rng.below(2 * 3600 * 1000));
                shock_inc = 1;
            } else {
                int slot = static_cast<int>(rng.below(kBarsPerDay - 1));
                tod = chr::hours(9) + chr::minutes(30 * slot) + chr::milliseconds(rng.below(30 * 60 * 1000));
                shock_inc = slot + 1;
            }

            int n_words = spec.min_words + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                                               spec.max_words - spec.min_words + 1)));
            std::vector<std::string> words;
            for (int w = 0; w < n_words; ++w) {
                words.push_back(background_word(static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.vocabulary_size)))));
            }
            int n_stop = static_cast<int>(rng.below(3));
            for (int w = 0; w < n_stop; ++w) {
                auto pos = rng.below(words.size() + 1);
                words.insert(words.begin() + static_cast<long>(pos), stop_list[rng.below(stop_list.size())]);
            }
            if (rng.uniform() < spec.signal_probability) {
                bool positive = rng.uniform() < 0.5;
                const auto& list = positive ? spec.positive_words : spec.negative_words;
                auto pos = rng.below(words.size() + 1);
                words.insert(words.begin() + static_cast<long>(pos), list[rng.below(list.size())]);
                shock_at(day, shock_inc, stock) += positive ? spec.effect_size : -spec.effect_size;
            }

            std::string headline;
            for (const auto& w : words) {
                if (!headline.empty()) headline += ' ';
                headline += w;
            }
            headline[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(headline[0])));
            NewsItem item;
            auto whole = chr::floor<chr::seconds>(tod);
            item.timestamp = cal.zone.from_local(days[static_cast<std::size_t>(day)], whole) + (tod - whole);
            item.ticker = ticker_name(static_cast<int>(stock));
            item.headline = std::move(headline);
            today.push_back(std::move(item));
        }
        std::stable_sort(today.begin(), today.end(),
                         [](const NewsItem& a, const NewsItem& b) { return a.timestamp < b.timestamp; });
        for (auto& item : today) {
            item.id = out.news.size() + 1;
            out.news.push_back(std::move(item));
        }
    }

    SplitMix64 prng(spec.seed ^ kPriceStream);
    std::vector<double> price(S);
    for (auto& p : price) p = 20.0 + 80.0 * prng.uniform();
    const double sigma = spec.noise_volatility / std::sqrt(static_cast<double>(kBarsPerDay));

    std::vector<PriceSeries> series(S);
    for (std::size_t s = 0; s < S; ++s) series[s].instrument = ticker_name(static_cast<int>(s));
    PriceSeries index;
    index.instrument = kSyntheticIndex;
    for (int day = 0; day < total_days; ++day) {
        Date date = days[static_cast<std::size_t>(day)];
        Instant open = cal.open_instant(date);
        for (int inc = 0; inc < kBarsPerDay; ++inc) {
            Instant t = open + chr::minutes(30 * inc);
            double sum = 0;
            for (std::size_t s = 0; s < S; ++s) {
                price[s] *= std::exp(sigma * prng.normal() + shock_at(day, inc, s));
                series[s].minute_bars.push_back({t, price[s]});
                sum += price[s];
            }
            index.minute_bars.push_back({t, sum / static_cast<double>(S)});
        }
        for (std::size_t s = 0; s < S; ++s) series[s].daily_closes.emplace_back(date, price[s]);
        index.daily_closes.emplace_back(date, index.minute_bars.back().price);
    }
    for (auto& s : series) out.prices.emplace(s.instrument, std::move(s));
    out.prices.emplace(index.instrument, std::move(index));
    return out;
}

StaticTable random_static_table(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed) {
    StaticTable table(dim);
    SplitMix64 rng(seed);
    for (const auto& tok : tokens) {
        std::vector<float> v(dim);
        for (auto& x : v) x = static_cast<float>(rng.normal());
        table.add(tok, std::move(v));
    }
    return table;
}

std::vector<HeadlineEmbedding> synthetic_layer_embeddings(const std::vector<NewsItem>& news, const StaticTable& table,
                                                          std::uint16_t layer, std::uint16_t rows) {
    if (layer == 0) throw ConfigError("contextual layers are numbered from 1");
    std::vector<HeadlineEmbedding> out;
    out.reserve(news.size());
    const std::size_t dim = table.dimension();
    for (const auto& item : news) {
        HeadlineEmbedding e;
        e.news_id = item.id;
        e.source = EmbeddingSource::Tuned;
        e.layer = layer;
        e.rows = rows;
        e.cols = static_cast<std::uint16_t>(dim);
        e.values.assign(static_cast<std::size_t>(rows) * dim, 0.0f);
        auto tokens = tokenize(item.headline);
        std::size_t r = 0;
        for (const auto& tok : tokens) {
            if (r == rows) break;
            if (const auto* v = table.find(tok)) std::copy(v->begin(), v->end(), e.values.begin() + static_cast<long>(r * dim));
            ++r;
        }
        out.push_back(std::move(e));
    }
    return out;
}

SyntheticFiles write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    SyntheticFiles files{dir / "news.csv", dir / "prices_daily.csv", dir / "prices_minute.csv", dir / "calendar.txt"};
    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + p.string());
        return f;
    };
    {
        auto f = open(files.news);
        write_news(f, corpus.news, NewsFormat::Csv);
    }
    {
        auto f = open(files.daily_prices);
        write_daily_prices(f, corpus.prices);
    }
    {
        auto f = open(files.minute_prices);
        write_minute_prices(f, corpus.prices);
    }
    {
        auto f = open(files.calendar);
        corpus.calendar.write(f);
    }
    return files;
}

}  // namespace newsalpha
