#include "newsalpha/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Nbc: return "nbc";
        case ModelKind::Ssestm: return "ssestm";
        case ModelKind::RnnStatic: return "rnn-static";
        case ModelKind::RnnContextual: return "rnn-contextual";
    }
    return "?";
}

ModelKind model_kind_from_string(std::string_view s) {
    if (s == "nbc") return ModelKind::Nbc;
    if (s == "ssestm") return ModelKind::Ssestm;
    if (s == "rnn-static") return ModelKind::RnnStatic;
    if (s == "rnn-contextual") return ModelKind::RnnContextual;
    throw ConfigError("unknown model '" + std::string(s) + "'");
}

void RollingSpec::validate() const {
    if (train_days <= 0 || test_days <= 0 || step_days <= 0) throw ConfigError("rolling spans must be positive");
    if (!(dev_fraction >= 0 && dev_fraction < 1)) throw ConfigError("dev fraction must lie in [0, 1)");
}

std::optional<Split> Window::split_of(Date s) const {
    if (s >= train_first && s < dev_first && s <= train_last) return Split::Train;
    if (s >= dev_first && s <= train_last) return Split::Dev;
    if (s >= test_first && s <= test_last) return Split::Test;
    return std::nullopt;
}

std::vector<Window> rolling_windows(const std::vector<Date>& sessions, const RollingSpec& spec) {
    spec.validate();
    std::vector<Window> out;
    const auto train = static_cast<std::size_t>(spec.train_days);
    const auto test = static_cast<std::size_t>(spec.test_days);
    const auto dev = static_cast<std::size_t>(std::ceil(spec.dev_fraction * spec.train_days - 1e-9));
    for (std::size_t start = 0; start + train < sessions.size(); start += static_cast<std::size_t>(spec.step_days)) {
        Window w;
        w.index = out.size();
        w.train_first = sessions[start];
        w.train_last = sessions[start + train - 1];
        w.test_first = sessions[start + train];
        w.test_last = sessions[std::min(sessions.size(), start + train + test) - 1];
        w.dev_first = dev == 0 ? w.test_first : sessions[start + train - dev];
        out.push_back(w);
    }
    return out;
}

std::vector<Date> news_sessions(const std::vector<NewsItem>& news, const TradingCalendar& cal) {
    if (news.empty()) return {};
    Date first = Date::max(), last = Date::min();
    for (const auto& n : news) {
        Date s = cal.session_of(n.timestamp);
        first = std::min(first, s);
        last = std::max(last, s);
    }
    std::vector<Date> out;
    for (Date d = first; d <= last; d = cal.next_trading_day(d)) out.push_back(d);
    return out;
}

// ---------------------------------------------------------------- config

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        return csv::parse_double(v);
    } catch (const FormatError&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    try {
        return static_cast<int>(csv::parse_int(v));
    } catch (const FormatError&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void set_run_config_value(RunConfig& c, const std::string& key, const std::string& v,
                          const std::filesystem::path& base) {
    using std::chrono::minutes;
    if (key == "data.news") c.news = resolve(base, v);
    else if (key == "data.news_format") c.news_format = news_format_from_tag(v);
    else if (key == "data.daily_prices") c.daily_prices = resolve(base, v);
    else if (key == "data.minute_prices") c.minute_prices = resolve(base, v);
    else if (key == "data.calendar") c.calendar = resolve(base, v);
    else if (key == "data.static_table") c.static_table = resolve(base, v);
    else if (key == "data.embeddings") c.embeddings = resolve(base, v);
    else if (key == "data.market") c.market = v;
    else if (key == "label.q") c.quantile.q = to_double(key, v);
    else if (key == "label.delta_in_minutes") c.horizon.delta_in = minutes(to_int(key, v));
    else if (key == "label.delta_out_days") c.horizon.delta_out_days = to_int(key, v);
    else if (key == "label.minute_grace_minutes") c.horizon.minute_grace = minutes(to_int(key, v));
    else if (key == "label.daily_grace_days") c.horizon.daily_grace_days = to_int(key, v);
    else if (key == "rolling.train_days") c.rolling.train_days = to_int(key, v);
    else if (key == "rolling.test_days") c.rolling.test_days = to_int(key, v);
    else if (key == "rolling.step_days") c.rolling.step_days = to_int(key, v);
    else if (key == "rolling.dev_fraction") c.rolling.dev_fraction = to_double(key, v);
    else if (key == "rolling.window") c.window = static_cast<std::size_t>(to_int(key, v));
    else if (key == "model.kind") c.model = model_kind_from_string(v);
    else if (key == "nbc.alpha") c.nbc_alpha = to_double(key, v);
    else if (key == "ssestm.alpha_plus") c.ssestm.alpha_plus = to_double(key, v);
    else if (key == "ssestm.alpha_minus") c.ssestm.alpha_minus = to_double(key, v);
    else if (key == "ssestm.kappa") c.ssestm.kappa = to_double(key, v);
    else if (key == "ssestm.lambda") c.ssestm.lambda = to_double(key, v);
    else if (key == "ssestm.grid_step") c.ssestm.grid_step = to_double(key, v);
    else if (key == "rnn.cell") c.rnn.cell = cell_kind_from_string(v);
    else if (key == "rnn.widths") {
        c.rnn.layer_widths.clear();
        for (const auto& w : split_list(v)) c.rnn.layer_widths.push_back(to_int(key, w));
    } else if (key == "rnn.dropout") c.rnn.dropout = to_double(key, v);
    else if (key == "rnn.seed") c.rnn.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "rnn.learning_rate") c.rnn.learning_rate = to_double(key, v);
    else if (key == "rnn.batch_size") c.rnn.batch_size = to_int(key, v);
    else if (key == "rnn.max_epochs") c.rnn.max_epochs = to_int(key, v);
    else if (key == "rnn.patience") c.rnn.patience = to_int(key, v);
    else if (key == "rnn.min_improvement") c.rnn.min_improvement = to_double(key, v);
    else if (key == "rnn.oov") {
        if (v == "zero") c.oov = OovPolicy::Zero;
        else if (v == "skip") c.oov = OovPolicy::Skip;
        else throw ConfigError("rnn.oov must be zero or skip");
    } else if (key == "strategy.lookback_days") c.strategy.lookback_days = to_int(key, v);
    else if (key == "strategy.unit_notional") c.strategy.unit_notional = to_double(key, v);
    else if (key == "strategy.top_k") c.strategy.top_k = to_int(key, v);
    else if (key == "strategy.cost_rate") c.strategy.cost_rate = to_double(key, v);
    else if (key == "strategy.trading_days") c.strategy.trading_days = to_int(key, v);
    else if (key == "eval.ns") {
        c.eval_ns.clear();
        for (const auto& n : split_list(v)) c.eval_ns.push_back(to_double(key, n));
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config key '" + section + "' must sit inside a section");
        for (const auto& [key, value] : body) set_run_config_value(cfg, section + "." + key, value.data(), base);
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    horizon.validate();
    quantile.validate();
    rolling.validate();
    ssestm.validate();
    rnn.validate();
    strategy.validate();
    if (!(nbc_alpha > 0)) throw ConfigError("nbc.alpha must be positive");
    for (double n : eval_ns) {
        if (!(n > 0 && n < 50)) throw ConfigError("eval.ns entries must lie in (0, 50)");
    }
}

std::map<std::string, std::string> RunConfig::describe() const {
    auto d = csv::format_double;
    auto mins = [](std::chrono::milliseconds m) {
        return std::to_string(std::chrono::duration_cast<std::chrono::minutes>(m).count());
    };
    std::vector<std::string> widths, ns;
    for (int w : rnn.layer_widths) widths.push_back(std::to_string(w));
    for (double n : eval_ns) ns.push_back(d(n));
    return {
        {"data.market", market},
        {"data.news_format", news_format == NewsFormat::Csv ? "csv" : "jsonl"},
        {"label.q", d(quantile.q)},
        {"label.delta_in_minutes", mins(horizon.delta_in)},
        {"label.delta_out_days", std::to_string(horizon.delta_out_days)},
        {"label.minute_grace_minutes", mins(horizon.minute_grace)},
        {"label.daily_grace_days", std::to_string(horizon.daily_grace_days)},
        {"rolling.train_days", std::to_string(rolling.train_days)},
        {"rolling.test_days", std::to_string(rolling.test_days)},
        {"rolling.step_days", std::to_string(rolling.step_days)},
        {"rolling.dev_fraction", d(rolling.dev_fraction)},
        {"rolling.window", std::to_string(window)},
        {"model.kind", to_string(model)},
        {"nbc.alpha", d(nbc_alpha)},
        {"ssestm.alpha_plus", d(ssestm.alpha_plus)},
        {"ssestm.alpha_minus", d(ssestm.alpha_minus)},
        {"ssestm.kappa", d(ssestm.kappa)},
        {"ssestm.lambda", d(ssestm.lambda)},
        {"ssestm.grid_step", d(ssestm.grid_step)},
        {"rnn.cell", to_string(rnn.cell)},
        {"rnn.widths", join(widths)},
        {"rnn.dropout", d(rnn.dropout)},
        {"rnn.seed", std::to_string(rnn.seed)},
        {"rnn.learning_rate", d(rnn.learning_rate)},
        {"rnn.batch_size", std::to_string(rnn.batch_size)},
        {"rnn.max_epochs", std::to_string(rnn.max_epochs)},
        {"rnn.patience", std::to_string(rnn.patience)},
        {"rnn.min_improvement", d(rnn.min_improvement)},
        {"rnn.oov", oov == OovPolicy::Zero ? "zero" : "skip"},
        {"strategy.lookback_days", std::to_string(strategy.lookback_days)},
        {"strategy.unit_notional", d(strategy.unit_notional)},
        {"strategy.top_k", std::to_string(strategy.top_k)},
        {"strategy.cost_rate", d(strategy.cost_rate)},
        {"strategy.trading_days", std::to_string(strategy.trading_days)},
        {"eval.ns", join(ns)},
    };
}

MarketData load_market_data(const RunConfig& cfg) {
    MarketData data;
    if (cfg.news.empty()) throw ConfigError("no news file configured");
    {
        std::ifstream f(cfg.news, std::ios::binary);
        if (!f) throw IngestError("cannot open news file " + cfg.news.string());
        data.news = parse_news(f, cfg.news_format);
    }
    if (cfg.daily_prices.empty() && cfg.minute_prices.empty()) throw NoPriceCoverage("no price file configured");
    for (const auto* path : {&cfg.daily_prices, &cfg.minute_prices}) {
        if (path->empty()) continue;
        std::ifstream f(*path, std::ios::binary);
        if (!f) throw NoPriceCoverage("cannot open price file " + path->string());
        if (path == &cfg.daily_prices) read_daily_prices(f, data.prices);
        else read_minute_prices(f, data.prices);
    }
    if (!cfg.calendar.empty()) {
        std::ifstream f(cfg.calendar);
        if (!f) throw ConfigError("cannot open calendar " + cfg.calendar.string());
        data.calendar = TradingCalendar::parse(f);
    }
    return data;
}

// ---------------------------------------------------------------- labeling

WindowLabels label_window(const std::vector<NewsItem>& news, const PriceBook& prices, const std::string& market,
                          const TradingCalendar& cal, const HorizonConfig& horizon, LabelQuantile quantile,
                          const Window& window) {
    std::vector<NewsItem> members;
    std::unordered_map<std::uint64_t, Split> split_of;
    for (const auto& n : news) {
        if (auto s = window.split_of(cal.session_of(n.timestamp))) {
            members.push_back(n);
            split_of[n.id] = *s;
        }
    }
    auto computed = compute_returns(members, prices, market, cal, horizon);

    std::vector<ReturnRecord> train, dev, test;
    for (const auto& r : computed.returns) {
        switch (split_of.at(r.news_id)) {
            case Split::Train: train.push_back(r); break;
            case Split::Dev: dev.push_back(r); break;
            case Split::Test: test.push_back(r); break;
        }
    }
    std::unordered_map<std::uint64_t, LabeledExample> by_id;
    if (!train.empty()) {
        for (const auto& e : label_training(train, quantile)) by_id[e.news_id] = e;
    }
    for (const auto& e : label_eval(dev, Split::Dev)) by_id[e.news_id] = e;
    for (const auto& e : label_eval(test, Split::Test)) by_id[e.news_id] = e;

    WindowLabels out;
    out.window = window;
    out.skipped = std::move(computed.skipped);
    for (const auto& r : computed.returns) out.examples.push_back(by_id.at(r.news_id));
    return out;
}

// ---------------------------------------------------------------- models

EmbeddingMap index_embeddings(std::vector<HeadlineEmbedding> items) {
    EmbeddingMap out;
    for (auto& e : items) {
        auto id = e.news_id;
        if (!out.emplace(id, std::move(e)).second) {
            throw FormatError("embedding for news " + std::to_string(id) + " appears twice");
        }
    }
    return out;
}

namespace {

using NewsIndex = std::unordered_map<std::uint64_t, const NewsItem*>;

NewsIndex index_news(const std::vector<NewsItem>& news) {
    NewsIndex idx;
    for (const auto& n : news) idx[n.id] = &n;
    return idx;
}

const NewsItem& lookup(const NewsIndex& idx, std::uint64_t id) {
    auto it = idx.find(id);
    if (it == idx.end()) throw AlignmentError("labeled news " + std::to_string(id) + " is not in the corpus");
    return *it->second;
}

// Input sequence for the recurrent models; nullopt when nothing embeds.
std::optional<Sequence> sequence_for(const NewsItem& item, const Features& f) {
    if (f.embeddings) {
        auto it = f.embeddings->find(item.id);
        if (it == f.embeddings->end()) {
            throw AlignmentError("no embedding for news " + std::to_string(item.id));
        }
        return Sequence::from_embedding(it->second);
    }
    if (!f.table) throw ConfigError("the static-embedding model needs a static table");
    auto tokens = tokenize(item.headline);
    try {
        return Sequence::from_embedding(embed_static(tokens, *f.table, f.oov, item.id));
    } catch (const EmptyHeadline&) {
        return std::nullopt;
    }
}

}  // namespace

TrainedModel train_model(const RunConfig& cfg, const std::vector<NewsItem>& news,
                         const std::vector<LabeledExample>& labels, const Features& features) {
    auto idx = index_news(news);
    if (cfg.model == ModelKind::Nbc || cfg.model == ModelKind::Ssestm) {
        std::vector<TextExample> examples;
        for (const auto& l : labels) {
            if (l.split != Split::Train || l.label == Label::Excluded) continue;
            examples.push_back({tokenize(lookup(idx, l.news_id).headline), l.label == Label::Positive ? 1 : 0,
                                l.adjusted_return});
        }
        if (cfg.model == ModelKind::Nbc) return nbc_train(examples, cfg.nbc_alpha);
        return ssestm_train(examples, cfg.ssestm);
    }
    Features f = features;
    if (cfg.model == ModelKind::RnnStatic) f.embeddings = nullptr;
    else if (!f.embeddings) throw ConfigError("the contextual model needs an embedding file");
    std::vector<LabeledSequence> train_set, dev_set;
    for (const auto& l : labels) {
        if (l.split == Split::Test || l.label == Label::Excluded) continue;
        auto seq = sequence_for(lookup(idx, l.news_id), f);
        if (!seq) continue;
        (l.split == Split::Train ? train_set : dev_set).push_back({std::move(*seq), l.label == Label::Positive});
    }
    if (train_set.empty()) throw DegenerateTraining("no embeddable training headlines");
    return train(cfg.rnn, train_set, dev_set).model;
}

double predict(const TrainedModel& model, const NewsItem& item, const Features& features) {
    if (const auto* m = std::get_if<NbcModel>(&model)) return nbc_score(*m, tokenize(item.headline));
    if (const auto* m = std::get_if<SsestmModel>(&model)) return ssestm_score(*m, tokenize(item.headline));
    auto seq = sequence_for(item, features);
    if (!seq) return 0.5;
    return forward(std::get<RnnModel>(model), *seq);
}

namespace {

ScoredNews scored_row(const NewsItem& item, const LabeledExample& l, double p_plus) {
    ScoredNews s = make_scored(item.id, p_plus);
    s.timestamp = item.timestamp;
    s.ticker = item.ticker;
    s.split = l.split;
    return s;
}

}  // namespace

std::vector<ScoredNews> score_labeled(const TrainedModel& model, const std::vector<NewsItem>& news,
                                      const std::vector<LabeledExample>& labels, const Features& features) {
    auto idx = index_news(news);
    std::vector<ScoredNews> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        const auto& item = lookup(idx, l.news_id);
        out.push_back(scored_row(item, l, predict(model, item, features)));
    }
    return out;
}

std::vector<ScoredNews> attach_precomputed(std::istream& in, const std::vector<NewsItem>& news,
                                           const std::vector<LabeledExample>& labels) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"news_id", "p_plus"});
    std::unordered_map<std::uint64_t, double> p;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        std::size_t row = reader.record_index() - 1;
        if (f.size() != 2) throw RowError(row, "*", "expected 2 fields");
        try {
            p[csv::parse_uint(f[0])] = csv::parse_double(f[1]);
        } catch (const FormatError& e) {
            throw RowError(row, "*", e.what());
        }
    }
    auto idx = index_news(news);
    std::vector<ScoredNews> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = p.find(l.news_id);
        if (it == p.end()) throw AlignmentError("no precomputed score for news " + std::to_string(l.news_id));
        out.push_back(scored_row(lookup(idx, l.news_id), l, it->second));
    }
    return out;
}

void write_model(std::ostream& out, const TrainedModel& model) {
    if (const auto* m = std::get_if<NbcModel>(&model)) write_nbc(out, *m);
    else if (const auto* m = std::get_if<SsestmModel>(&model)) write_ssestm(out, *m);
    else write_checkpoint(out, std::get<RnnModel>(model));
}

TrainedModel read_model(std::istream& in, ModelKind kind) {
    switch (kind) {
        case ModelKind::Nbc: return read_nbc(in);
        case ModelKind::Ssestm: return read_ssestm(in);
        default: return read_checkpoint(in);
    }
}

// ---------------------------------------------------------------- evaluation

std::vector<EvalRow> evaluate_window(const std::string& model, const std::vector<ScoredNews>& scored,
                                     const std::vector<LabeledExample>& labels, const std::vector<double>& ns) {
    std::vector<ScoredNews> training, test;
    for (const auto& s : scored) (s.split == Split::Test ? test : training).push_back(s);
    std::vector<LabeledExample> test_labels;
    for (const auto& l : labels) {
        if (l.split == Split::Test) test_labels.push_back(l);
    }
    return evaluate_extremes(model, training, test, test_labels, ns);
}

std::vector<BacktestRun> backtest_window(const std::string& model, const std::vector<ScoredNews>& scored,
                                         const Window& window, const PriceBook& prices, const TradingCalendar& cal,
                                         const StrategyConfig& strategy, const std::vector<double>& ns) {
    std::vector<double> training;
    std::vector<ScoredNews> test;
    for (const auto& s : scored) {
        if (s.split == Split::Test) test.push_back(s);
        else training.push_back(s.score);
    }
    std::vector<BacktestRun> runs;
    for (double n : ns) {
        auto extreme = select_extreme(test, percentile_thresholds(training, n));
        for (Strategy st : {Strategy::S1, Strategy::S2}) {
            auto books = build_daily_books(extreme, window.test_first, window.test_last, cal, st, strategy);
            for (bool costs : {false, true}) {
                BacktestRun run{st, n, costs, simulate(books, prices, strategy, costs), {}};
                double turnover = 0, gross = 0;
                for (const auto& r : run.ledger.rows) {
                    turnover += r.turnover;
                    gross += r.gross;
                }
                const double days = static_cast<double>(std::max<std::size_t>(1, run.ledger.rows.size()));
                double sr = std::numeric_limits<double>::quiet_NaN();
                try {
                    sr = sharpe(run.ledger, strategy.trading_days);
                } catch (const DegenerateSharpe&) {
                }
                double ann = run.ledger.rows.empty() ? 0.0 : annualized_return(run.ledger, strategy.trading_days);
                run.summary = {model, st, n, costs, ann, sr, turnover / days, gross / days};
                runs.push_back(std::move(run));
            }
        }
    }
    return runs;
}

// ---------------------------------------------------------------- ablation

std::vector<AblationRow> ablate_layers(const RunConfig& cfg, const std::vector<NewsItem>& news,
                                       const std::vector<LabeledExample>& labels,
                                       const std::vector<std::vector<HeadlineEmbedding>>& layer_sets) {
    std::set<std::uint16_t> seen;
    std::vector<AblationRow> rows;
    RunConfig run = cfg;
    run.model = ModelKind::RnnContextual;
    for (const auto& set : layer_sets) {
        if (set.empty()) throw EmptyDataset("an embedding set is empty");
        const auto layer = set.front().layer;
        const auto source = set.front().source;
        for (const auto& e : set) {
            if (e.layer != layer || e.source != source) {
                throw IncompatibleArtifacts("an embedding set mixes layer or source tags");
            }
        }
        if (!seen.insert(layer).second) {
            throw IncompatibleArtifacts("layer " + std::to_string(layer) + " appears in more than one file");
        }
        auto map = index_embeddings(set);
        Features f;
        f.embeddings = &map;
        auto model = train_model(run, news, labels, f);
        auto scored = score_labeled(model, news, labels, f);
        auto eval = evaluate_window(to_string(run.model), scored, labels, {1.0});
        rows.push_back({layer, source, eval.front().accuracy});
    }
    return rows;
}

void write_ablation(std::ostream& out, const std::vector<AblationRow>& rows) {
    csv::Writer w(out);
    w.row({"layer", "source", "e1_accuracy"});
    for (const auto& r : rows) w.row({std::to_string(r.layer), to_string(r.source), csv::format_double(r.e1_accuracy)});
}

}  // namespace newsalpha
