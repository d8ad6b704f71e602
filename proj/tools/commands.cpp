#include "commands.hpp"

#include <fstream>
#include <iostream>

#include "newsalpha/artifacts.hpp"
#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha::cli {

namespace {

constexpr const char* kFillNote = "positions are filled at the close of the day their book is formed";

std::ifstream open_in(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IngestError("cannot open " + p.string());
    return f;
}

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + p.string());
    return f;
}

void add_input(Manifest& m, const std::string& role, const fs::path& p) {
    if (!p.empty() && fs::exists(p)) m.inputs[role] = sha256_file(p);
}

Manifest base_manifest(const std::string& kind, const RunConfig& cfg) {
    Manifest m;
    m.kind = kind;
    m.config = cfg.describe();
    add_input(m, "news", cfg.news);
    add_input(m, "daily_prices", cfg.daily_prices);
    add_input(m, "minute_prices", cfg.minute_prices);
    add_input(m, "calendar", cfg.calendar);
    return m;
}

Window select_window(const RunConfig& cfg, const std::vector<NewsItem>& news, const TradingCalendar& cal) {
    auto windows = rolling_windows(news_sessions(news, cal), cfg.rolling);
    if (cfg.window >= windows.size()) {
        throw ConfigError("window " + std::to_string(cfg.window) + " does not exist (" +
                          std::to_string(windows.size()) + " windows fit the data)");
    }
    return windows[cfg.window];
}

std::string window_note(const Window& w) {
    return "window " + std::to_string(w.index) + ": train " + format_date(w.train_first) + ".." +
           format_date(w.train_last) + ", dev from " + format_date(w.dev_first) + ", test " +
           format_date(w.test_first) + ".." + format_date(w.test_last);
}

std::vector<LabeledExample> load_labels(const fs::path& p) {
    check_artifact(p, "labels");
    auto f = open_in(p);
    return read_labeled(f);
}

std::vector<NewsItem> load_news(const RunConfig& cfg) {
    if (cfg.news.empty()) throw ConfigError("no news file configured");
    auto f = open_in(cfg.news);
    return parse_news(f, cfg.news_format);
}

struct LoadedFeatures {
    StaticTable table;
    EmbeddingMap embeddings;
    Features features;
};

void load_features(const RunConfig& cfg, LoadedFeatures& out) {
    out.features.oov = cfg.oov;
    if (cfg.model == ModelKind::RnnStatic) {
        if (cfg.static_table.empty()) throw ConfigError("rnn-static needs data.static_table");
        auto f = open_in(cfg.static_table);
        out.table = load_static_table(f);
        out.features.table = &out.table;
    } else if (cfg.model == ModelKind::RnnContextual) {
        if (cfg.embeddings.empty()) throw ConfigError("rnn-contextual needs data.embeddings");
        auto f = open_in(cfg.embeddings);
        out.embeddings = index_embeddings(read_embeddings(f));
        out.features.embeddings = &out.embeddings;
    }
}

std::vector<ScoredNews> load_scores(const fs::path& p) {
    check_artifact(p, "scores");
    auto f = open_in(p);
    return read_scored(f);
}

}  // namespace

void cmd_synth(const SynthOptions& opt) {
    auto corpus = generate(opt.spec);
    auto files = write_synthetic(corpus, opt.out_dir);
    auto table = random_static_table(synthetic_vocabulary(opt.spec), opt.table_dim, opt.spec.seed);
    fs::path table_path = opt.out_dir / "static_table.txt";
    {
        auto f = open_out(table_path);
        write_static_table(f, table);
    }
    std::vector<fs::path> outputs{files.news, files.daily_prices, files.minute_prices, files.calendar, table_path};
    for (int layer : opt.layers) {
        if (layer <= 0 || layer > 0xFFFF) throw ConfigError("layer tags must lie in 1..65535");
        auto emb = synthetic_layer_embeddings(corpus.news, table, static_cast<std::uint16_t>(layer));
        fs::path p = opt.out_dir / ("embeddings_L" + std::to_string(layer) + ".emb");
        auto f = open_out(p);
        write_embeddings(emb, f);
        f.close();
        outputs.push_back(p);
    }
    fs::path cfg_path = opt.out_dir / "config.ini";
    {
        auto f = open_out(cfg_path);
        f << "[data]\nnews = news.csv\ndaily_prices = prices_daily.csv\nminute_prices = prices_minute.csv\n"
             "calendar = calendar.txt\nstatic_table = static_table.txt\nmarket = "
          << corpus.market_instrument << "\n";
        if (!opt.layers.empty()) f << "embeddings = embeddings_L" << opt.layers.front() << ".emb\n";
    }
    outputs.push_back(cfg_path);
    Manifest m;
    m.kind = "synthetic";
    auto d = csv::format_double;
    m.config = {{"seed", std::to_string(opt.spec.seed)},
                {"n_stocks", std::to_string(opt.spec.n_stocks)},
                {"n_days", std::to_string(opt.spec.n_days)},
                {"headlines_per_day", std::to_string(opt.spec.headlines_per_day)},
                {"vocabulary_size", std::to_string(opt.spec.vocabulary_size)},
                {"effect_size", d(opt.spec.effect_size)},
                {"noise_volatility", d(opt.spec.noise_volatility)},
                {"signal_probability", d(opt.spec.signal_probability)},
                {"table_dim", std::to_string(opt.table_dim)}};
    write_manifest(files.news, m, outputs);
}

void cmd_label(const RunConfig& cfg, const fs::path& output) {
    auto data = load_market_data(cfg);
    auto window = select_window(cfg, data.news, data.calendar);
    auto labels = label_window(data.news, data.prices, cfg.market, data.calendar, cfg.horizon, cfg.quantile, window);
    {
        auto f = open_out(output);
        write_labeled(f, labels.examples);
    }
    for (const auto& s : labels.skipped) std::cerr << "skipped news " << s.news_id << ": " << s.reason << '\n';
    Manifest m = base_manifest("labels", cfg);
    m.notes = {window_note(window), "dev is the last " + csv::format_double(cfg.rolling.dev_fraction * 100) +
                                        "% of the training span",
               std::to_string(labels.skipped.size()) + " headlines skipped for missing price coverage"};
    write_manifest(output, m, {output});
}

void cmd_train(const RunConfig& cfg, const fs::path& labels_path, const fs::path& output) {
    auto labels = load_labels(labels_path);
    auto news = load_news(cfg);
    LoadedFeatures lf;
    load_features(cfg, lf);
    auto model = train_model(cfg, news, labels, lf.features);
    {
        auto f = open_out(output);
        write_model(f, model);
    }
    Manifest m = base_manifest("model", cfg);
    add_input(m, "labels", labels_path);
    add_input(m, "static_table", cfg.model == ModelKind::RnnStatic ? cfg.static_table : fs::path{});
    add_input(m, "embeddings", cfg.model == ModelKind::RnnContextual ? cfg.embeddings : fs::path{});
    m.notes = {"model " + to_string(cfg.model)};
    write_manifest(output, m, {output});
}

void cmd_score(const RunConfig& cfg, const fs::path& labels_path, const fs::path& model_path,
               const fs::path& precomputed, const fs::path& output) {
    auto labels = load_labels(labels_path);
    auto news = load_news(cfg);
    std::vector<ScoredNews> scored;
    Manifest m = base_manifest("scores", cfg);
    add_input(m, "labels", labels_path);
    if (!precomputed.empty()) {
        auto f = open_in(precomputed);
        scored = attach_precomputed(f, news, labels);
        add_input(m, "precomputed", precomputed);
        m.notes = {"scores taken from a precomputed news_id,p_plus file"};
    } else {
        if (model_path.empty()) throw ConfigError("score needs --model or --precomputed");
        if (auto mm = check_artifact(model_path, "model")) {
            auto it = mm->config.find("model.kind");
            if (it != mm->config.end() && it->second != to_string(cfg.model)) {
                throw IncompatibleArtifacts(model_path.string() + " holds a " + it->second + " model, config asks for " +
                                            to_string(cfg.model));
            }
        }
        auto f = open_in(model_path);
        auto model = read_model(f, cfg.model);
        LoadedFeatures lf;
        load_features(cfg, lf);
        scored = score_labeled(model, news, labels, lf.features);
        add_input(m, "model", model_path);
        m.notes = {"model " + to_string(cfg.model)};
    }
    {
        auto f = open_out(output);
        write_scored(f, scored);
    }
    write_manifest(output, m, {output});
}

void cmd_eval(const RunConfig& cfg, const fs::path& labels_path, const fs::path& scores_path,
              const fs::path& output) {
    auto labels = load_labels(labels_path);
    auto scored = load_scores(scores_path);
    auto rows = evaluate_window(to_string(cfg.model), scored, labels, cfg.eval_ns);
    {
        auto f = open_out(output);
        write_eval_report(f, rows);
    }
    Manifest m = base_manifest("eval", cfg);
    add_input(m, "labels", labels_path);
    add_input(m, "scores", scores_path);
    m.notes = {"thresholds from train and dev scores, extreme sets from test scores"};
    write_manifest(output, m, {output});
}

void cmd_backtest(const RunConfig& cfg, const fs::path& scores_path, const fs::path& output,
                  const fs::path& ledger_dir) {
    auto scored = load_scores(scores_path);
    auto data = load_market_data(cfg);
    auto window = select_window(cfg, data.news, data.calendar);
    auto runs = backtest_window(to_string(cfg.model), scored, window, data.prices, data.calendar, cfg.strategy,
                                cfg.eval_ns);
    std::vector<fs::path> outputs{output};
    std::vector<BacktestSummary> summary;
    for (const auto& run : runs) {
        summary.push_back(run.summary);
        if (ledger_dir.empty()) continue;
        std::string stem = to_string(run.strategy) + "_n" + csv::format_double(run.n) +
                           (run.with_costs ? "_costs" : "_nocosts");
        fs::path ledger = ledger_dir / (stem + ".csv");
        fs::path pnl = ledger_dir / (stem + "_cumulative.csv");
        {
            auto f = open_out(ledger);
            write_ledger(f, run.ledger);
        }
        {
            auto f = open_out(pnl);
            write_cumulative_pnl(f, run.ledger);
        }
        outputs.push_back(ledger);
        outputs.push_back(pnl);
    }
    {
        auto f = open_out(output);
        write_backtest_summary(f, summary);
    }
    Manifest m = base_manifest("backtest", cfg);
    add_input(m, "scores", scores_path);
    m.notes = {kFillNote, window_note(window), "only extreme-set test headlines feed the books"};
    write_manifest(output, m, outputs);
}

void cmd_ablate(const RunConfig& cfg, const fs::path& labels_path, const std::vector<fs::path>& embeddings,
                const fs::path& output) {
    if (embeddings.size() != 3) throw ConfigError("ablate-layer expects three embedding files");
    auto labels = load_labels(labels_path);
    auto news = load_news(cfg);
    std::vector<std::vector<HeadlineEmbedding>> sets;
    Manifest m = base_manifest("ablation", cfg);
    add_input(m, "labels", labels_path);
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        auto f = open_in(embeddings[i]);
        sets.push_back(read_embeddings(f));
        add_input(m, "embeddings_" + std::to_string(i + 1), embeddings[i]);
    }
    auto rows = ablate_layers(cfg, news, labels, sets);
    {
        auto f = open_out(output);
        write_ablation(f, rows);
    }
    write_manifest(output, m, {output});
}

}  // namespace newsalpha::cli
