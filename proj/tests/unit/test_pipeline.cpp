#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "newsalpha/artifacts.hpp"
#include "newsalpha/errors.hpp"
#include "newsalpha/pipeline.hpp"
#include "newsalpha/synthetic.hpp"

using namespace newsalpha;
namespace fs = std::filesystem;

namespace {

std::vector<Date> weekdays(int n) {
    TradingCalendar cal;
    std::vector<Date> out{Date{std::chrono::year{2018} / 1 / 1}};
    while (static_cast<int>(out.size()) < n) out.push_back(cal.next_trading_day(out.back()));
    return out;
}

struct Fixture {
    SyntheticCorpus corpus;
    Window window;
    WindowLabels labels;

    Fixture() {
        SyntheticSpec spec;
        spec.n_stocks = 30;
        spec.n_days = 60;
        spec.headlines_per_day = 25;
        spec.vocabulary_size = 300;
        corpus = generate(spec);
        RollingSpec r{30, 20, 20, 0.1};
        auto windows = rolling_windows(news_sessions(corpus.news, corpus.calendar), r);
        window = windows.at(0);
        labels = label_window(corpus.news, corpus.prices, corpus.market_instrument, corpus.calendar, HorizonConfig{},
                              LabelQuantile{}, window);
    }
};

const Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("rolling windows") {
    auto s = weekdays(1000);
    auto w = rolling_windows(s, RollingSpec{});
    REQUIRE(w.size() == 1);
    CHECK(w[0].train_first == s[0]);
    CHECK(w[0].dev_first == s[675]);
    CHECK(w[0].train_last == s[749]);
    CHECK(w[0].test_first == s[750]);
    CHECK(w[0].test_last == s[999]);

    auto many = rolling_windows(weekdays(1260), RollingSpec{});
    REQUIRE(many.size() == 3);
    CHECK(many[2].test_last == weekdays(1260).back());  // short final test span
    for (const auto& win : many) {
        CHECK(win.train_last < win.test_first);
        CHECK(win.split_of(win.train_first) == Split::Train);
        CHECK(win.split_of(win.dev_first) == Split::Dev);
        CHECK(win.split_of(win.test_last) == Split::Test);
        CHECK_FALSE(win.split_of(win.test_last + std::chrono::days{30}).has_value());
    }
    CHECK(rolling_windows(weekdays(750), RollingSpec{}).empty());
    CHECK_THROWS_AS(rolling_windows(s, RollingSpec{0, 1, 1, 0.1}), ConfigError);
}

TEST_CASE("config file parsing and overrides") {
    std::istringstream in(
        "[data]\nnews = news.csv\ndaily_prices = /abs/prices.csv\nmarket = IDX\n"
        "[label]\nq = 0.2\ndelta_in_minutes = 60\n"
        "[model]\nkind = rnn-static\n"
        "[rnn]\ncell = gru\nwidths = 8,4\n"
        "[strategy]\ntop_k = 10\n"
        "[eval]\nns = 1,5\n");
    auto cfg = parse_run_config(in, "/base");
    CHECK(cfg.news == fs::path("/base/news.csv"));
    CHECK(cfg.daily_prices == fs::path("/abs/prices.csv"));
    CHECK(cfg.market == "IDX");
    CHECK(cfg.quantile.q == 0.2);
    CHECK(cfg.horizon.delta_in == std::chrono::minutes(60));
    CHECK(cfg.model == ModelKind::RnnStatic);
    CHECK(cfg.rnn.cell == CellKind::Gru);
    CHECK(cfg.rnn.layer_widths == std::vector<int>{8, 4});
    CHECK(cfg.strategy.top_k == 10);
    CHECK(cfg.eval_ns == std::vector<double>{1, 5});

    set_run_config_value(cfg, "strategy.cost_rate", "0.001");
    CHECK(cfg.strategy.cost_rate == 0.001);
    CHECK_THROWS_AS(set_run_config_value(cfg, "strategy.bogus", "1"), ConfigError);
    CHECK_THROWS_AS(set_run_config_value(cfg, "label.q", "abc"), ConfigError);

    auto described = cfg.describe();
    CHECK(described.at("model.kind") == "rnn-static");
    CHECK(described.at("rnn.widths") == "8,4");
    for (const auto& [k, v] : described) CHECK((k.rfind("data.news", 0) != 0 || k == "data.news_format"));

    std::istringstream bad("[label]\nq = 0.7\n");
    CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
    std::istringstream unknown("[nope]\nx = 1\n");
    CHECK_THROWS_AS(parse_run_config(unknown), ConfigError);
    std::istringstream bare("x = 1\n");
    CHECK_THROWS_AS(parse_run_config(bare), ConfigError);
}

TEST_CASE("default hyperparameters") {
    RunConfig cfg;
    CHECK(cfg.strategy.lookback_days == 5);
    CHECK(cfg.strategy.trading_days == 250);
    CHECK(cfg.quantile.q == 0.15);
    CHECK(cfg.horizon.delta_in == std::chrono::minutes(30));
    CHECK(cfg.horizon.delta_out_days == 1);
    CHECK(cfg.strategy.cost_rate == 4e-4);
}

TEST_CASE("missing inputs map to their error classes") {
    RunConfig cfg;
    CHECK_THROWS_AS(load_market_data(cfg), ConfigError);
    cfg.news = "/nonexistent/news.csv";
    CHECK_THROWS_AS(load_market_data(cfg), IngestError);
    auto dir = fs::temp_directory_path() / "newsalpha_pipeline_missing";
    fs::create_directories(dir);
    std::ofstream(dir / "news.csv") << "id,timestamp,ticker,headline,vendor_score,vendor_confidence\n";
    cfg.news = dir / "news.csv";
    CHECK_THROWS_AS(load_market_data(cfg), NoPriceCoverage);
    cfg.daily_prices = dir / "absent.csv";
    CHECK_THROWS_AS(load_market_data(cfg), NoPriceCoverage);
}

TEST_CASE("window labels") {
    const auto& f = fixture();
    std::size_t train = 0, kept = 0, pos = 0, neg = 0;
    for (const auto& e : f.labels.examples) {
        if (e.split == Split::Train) {
            ++train;
            if (e.label != Label::Excluded) ++kept;
            pos += e.label == Label::Positive;
            neg += e.label == Label::Negative && e.split == Split::Train;
        } else {
            CHECK(e.label != Label::Excluded);
        }
    }
    CHECK(train > 0);
    CHECK(kept == 2 * quantile_count(train, 0.15));
    CHECK(pos == neg);
    CHECK(f.labels.skipped.empty());
}

TEST_CASE("train, score, evaluate and backtest a window") {
    const auto& f = fixture();
    RunConfig cfg;
    cfg.model = ModelKind::Nbc;
    auto model = train_model(cfg, f.corpus.news, f.labels.examples, Features{});
    auto scored = score_labeled(model, f.corpus.news, f.labels.examples, Features{});
    CHECK(scored.size() == f.labels.examples.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        CHECK(scored[i].news_id == f.labels.examples[i].news_id);
        CHECK(scored[i].split == f.labels.examples[i].split);
        CHECK(scored[i].score == to_score(scored[i].p_plus));
    }
    auto rows = evaluate_window("nbc", scored, f.labels.examples, {1, 2, 5, 10});
    CHECK(rows.size() == 4);

    std::stringstream buf;
    write_model(buf, model);
    auto back = read_model(buf, ModelKind::Nbc);
    CHECK(score_labeled(back, f.corpus.news, f.labels.examples, Features{}) == scored);
    buf.clear();
    buf.seekg(0);
    CHECK_THROWS_AS(read_model(buf, ModelKind::Ssestm), IncompatibleArtifacts);

    auto runs = backtest_window("nbc", scored, f.window, f.corpus.prices, f.corpus.calendar, StrategyConfig{}, {1, 10});
    CHECK(runs.size() == 8);
    for (const auto& r : runs) {
        CHECK(r.summary.model == "nbc");
        for (const auto& row : r.ledger.rows) {
            CHECK(row.date > f.window.test_first);
            CHECK(row.date <= f.window.test_last);
        }
    }
}

TEST_CASE("precomputed scores") {
    const auto& f = fixture();
    std::ostringstream csv;
    csv << "news_id,p_plus\n";
    for (const auto& e : f.labels.examples) csv << e.news_id << ",0.25\n";
    std::istringstream in(csv.str());
    auto scored = attach_precomputed(in, f.corpus.news, f.labels.examples);
    CHECK(scored.size() == f.labels.examples.size());
    CHECK(scored.front().score == -0.5);

    std::istringstream partial("news_id,p_plus\n1,0.5\n");
    CHECK_THROWS_AS(attach_precomputed(partial, f.corpus.news, f.labels.examples), AlignmentError);
}

TEST_CASE("layer ablation") {
    const auto& f = fixture();
    RunConfig cfg;
    cfg.rnn.layer_widths = {4};
    cfg.rnn.max_epochs = 2;
    auto table = random_static_table(synthetic_vocabulary(SyntheticSpec{}), 4, 1);
    auto l12 = synthetic_layer_embeddings(f.corpus.news, table, 12, 8);
    auto l11 = synthetic_layer_embeddings(f.corpus.news, table, 11, 8);
    auto l10 = synthetic_layer_embeddings(f.corpus.news, table, 10, 8);
    auto rows = ablate_layers(cfg, f.corpus.news, f.labels.examples, {l12, l11, l10});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].layer == 12);
    CHECK(rows[2].layer == 10);
    // Identical contents under different tags give identical models.
    CHECK(rows[0].e1_accuracy == rows[1].e1_accuracy);
    CHECK(rows[1].e1_accuracy == rows[2].e1_accuracy);

    std::ostringstream out;
    write_ablation(out, rows);
    CHECK(out.str().rfind("layer,source,e1_accuracy\n12,tuned,", 0) == 0);

    CHECK_THROWS_AS(ablate_layers(cfg, f.corpus.news, f.labels.examples, {l12, l11, l12}), IncompatibleArtifacts);
    auto mixed = l11;
    mixed.back().layer = 10;
    CHECK_THROWS_AS(ablate_layers(cfg, f.corpus.news, f.labels.examples, {l12, mixed}), IncompatibleArtifacts);
}

TEST_CASE("manifests") {
    auto dir = fs::temp_directory_path() / "newsalpha_manifest";
    fs::remove_all(dir);
    fs::create_directories(dir);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

    auto artifact = dir / "labels.csv";
    std::ofstream(artifact) << "news_id,adjusted_return,label,split\n";
    Manifest m;
    m.kind = "labels";
    m.config = {{"label.q", "0.15"}};
    m.inputs = {{"news", sha256_hex("x")}};
    m.notes = {"dev is the last 10% of training"};
    write_manifest(artifact, m, {artifact});
    CHECK(manifest_path(artifact) == dir / "labels.csv.manifest.json");
    auto back = read_manifest(manifest_path(artifact));
    CHECK(back.kind == "labels");
    CHECK(back.schema_version == kSchemaVersion);
    CHECK(back.config == m.config);
    CHECK(back.inputs == m.inputs);
    CHECK(back.outputs.at("labels.csv") == sha256_file(artifact));
    CHECK(back.notes == m.notes);

    CHECK(check_artifact(artifact, "labels").has_value());
    CHECK_THROWS_AS(check_artifact(artifact, "model"), IncompatibleArtifacts);
    CHECK_FALSE(check_artifact(dir / "no_manifest.csv", "labels").has_value());

    std::ofstream(artifact, std::ios::app) << "1,0.1,1,train\n";
    CHECK_THROWS_AS(check_artifact(artifact, "labels"), IncompatibleArtifacts);

    m.schema_version = kSchemaVersion + 1;
    write_manifest(artifact, m, {artifact});
    CHECK_THROWS_AS(check_artifact(artifact, "labels"), IncompatibleArtifacts);
}
