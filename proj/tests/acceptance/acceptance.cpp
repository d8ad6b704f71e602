#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "newsalpha/artifacts.hpp"
#include "newsalpha/baselines.hpp"
#include "newsalpha/pipeline.hpp"
#include "newsalpha/random.hpp"
#include "newsalpha/rnn.hpp"
#include "newsalpha/synthetic.hpp"

using namespace newsalpha;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------- gradients

Outcome gradient_verification() {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    SplitMix64 rng(101);
    double worst = 0;
    int nets = 0;
    for (auto cell : {CellKind::Vanilla, CellKind::Lstm, CellKind::Gru}) {
        for (auto widths : {std::vector<int>{4}, std::vector<int>{6, 3}, std::vector<int>{5, 4, 2}}) {
            RnnConfig cfg;
            cfg.cell = cell;
            cfg.layer_widths = widths;
            cfg.dropout = 0;
            RnnModel m(cfg, 4);
            m.initialize(rng.next());
            o.require(m.parameter_count() <= 1000, "net exceeds 1000 parameters");
            std::vector<LabeledSequence> batch;
            for (int i = 0; i < 6; ++i) {
                Sequence s{1 + rng.below(6), 4, {}};
                for (std::size_t k = 0; k < s.steps * s.dim; ++k) s.values.push_back(rng.normal());
                batch.push_back({s, i % 2});
            }
            double e = gradient_check(m, batch);
            worst = std::max(worst, e);
            ++nets;
        }
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(worst < 1e-4, "max relative error " + fmt("%.3g", worst));
    o.require(secs < 60, "took " + fmt("%.1f", secs) + " s");
    if (o.pass) o.detail = std::to_string(nets) + " nets, max relative error " + fmt("%.2e", worst) + ", " + fmt("%.2f", secs) + " s";
    return o;
}

// ---------------------------------------------------------------- baselines

double bayes_posterior(const std::vector<TextExample>& corpus, double alpha, const std::vector<std::string>& doc) {
    std::map<std::string, std::array<double, 2>> counts;
    std::array<double, 2> totals{0, 0}, docs{0, 0};
    for (const auto& e : corpus) {
        docs[e.label] += 1;
        for (const auto& t : e.tokens) {
            counts[t][e.label] += 1;
            totals[e.label] += 1;
        }
    }
    const double v = static_cast<double>(counts.size());
    std::array<double, 2> joint{docs[0], docs[1]};
    for (const auto& t : doc) {
        if (!counts.contains(t)) continue;
        for (int c = 0; c < 2; ++c) joint[c] *= (counts[t][c] + alpha) / (totals[c] + alpha * v);
    }
    return joint[1] / (joint[0] + joint[1]);
}

// Maximizer of the penalized tone likelihood over a dense grid.
double dense_grid_argmax(const SsestmModel& m, const std::vector<std::string>& doc, double step) {
    std::map<std::string, int> counts;
    for (const auto& t : doc) {
        if (m.tone.contains(t)) ++counts[t];
    }
    if (counts.empty()) return 0.5;
    long n = std::lround(1 / step);
    double best = -INFINITY, arg = 0.5;
    for (long k = 1; k < n; ++k) {
        double p = static_cast<double>(k) / static_cast<double>(n);
        double v = m.params.lambda * (std::log(p) + std::log(1 - p));
        for (const auto& [t, c] : counts) {
            const auto& o = m.tone.at(t);
            v += c * std::log(p * o[0] + (1 - p) * o[1]);
        }
        if (v > best) {
            best = v;
            arg = p;
        }
    }
    return arg;
}

Outcome oracle_equivalence() {
    Outcome o;
    std::vector<TextExample> toy{{{"up", "good"}, 1, 0.02}, {{"down", "bad"}, 0, -0.02}};
    auto toy_model = nbc_train(toy, 1.0);
    o.require(std::abs(nbc_score(toy_model, {"good"}) - 2.0 / 3) < 1e-12, "toy posterior for 'good' is not 2/3");

    SplitMix64 rng(202);
    double nbc_worst = 0, ss_worst = 0;
    std::size_t docs = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TextExample> corpus;
        for (int i = 0; i < 300; ++i) {
            TextExample e;
            e.label = i < 2 ? i : static_cast<int>(rng.below(2));
            for (std::size_t k = 2 + rng.below(6); k > 0; --k) {
                std::size_t w = rng.below(40);
                if (rng.uniform() < 0.4) w = e.label ? w % 5 : 5 + w % 5;
                e.tokens.push_back("w" + std::to_string(w));
            }
            e.forward_return = 0.01 * rng.normal() + (e.label ? 0.004 : -0.004);
            corpus.push_back(e);
        }
        double alpha = trial % 2 ? 1.0 : 0.25;
        auto nbc = nbc_train(corpus, alpha);
        SsestmParams params;
        params.kappa = 5;
        auto ss = ssestm_train(corpus, params);
        for (int d = 0; d < 25; ++d) {
            std::vector<std::string> doc;
            for (std::size_t k = 1 + rng.below(8); k > 0; --k) doc.push_back("w" + std::to_string(rng.below(45)));
            nbc_worst = std::max(nbc_worst, std::abs(nbc_score(nbc, doc) - bayes_posterior(corpus, alpha, doc)));
            ss_worst = std::max(ss_worst, std::abs(ssestm_score(ss, doc) - dense_grid_argmax(ss, doc, 1e-5)));
            ++docs;
        }
    }
    // Fixed two-word model with counts (2 good, 1 bad).
    SsestmModel fixed;
    fixed.params.lambda = 0.1;
    fixed.tone = {{"good", {0.8, 0.2}}, {"bad", {0.2, 0.8}}};
    std::vector<std::string> doc{"good", "good", "bad"};
    ss_worst = std::max(ss_worst, std::abs(ssestm_score(fixed, doc) - dense_grid_argmax(fixed, doc, 1e-5)));

    o.require(nbc_worst < 1e-12, "NBC deviates from the Bayes oracle by " + fmt("%.3g", nbc_worst));
    o.require(ss_worst <= 1e-3 + 1e-12, "SSESTM deviates from the dense-grid oracle by " + fmt("%.3g", ss_worst));
    if (o.pass) {
        o.detail = std::to_string(docs) + " documents, NBC max error " + fmt("%.1e", nbc_worst) +
                   ", SSESTM max error " + fmt("%.1e", ss_worst);
    }
    return o;
}

// ---------------------------------------------------------------- labeling

Outcome labeling_counts() {
    Outcome o;
    std::size_t splits = 0;
    auto check_split = [&](const std::vector<LabeledExample>& rows) {
        std::size_t n = 0, pos = 0, neg = 0;
        for (const auto& e : rows) {
            if (e.split != Split::Train) {
                o.require(e.label != Label::Excluded, "dev/test row is excluded");
                continue;
            }
            ++n;
            pos += e.label == Label::Positive;
            neg += e.label == Label::Negative;
        }
        std::size_t expected = 2 * ((15 * n + 99) / 100);  // 2 * ceil(0.15 n) in integers
        o.require(pos + neg == expected, "train split of " + std::to_string(n) + " has " + std::to_string(pos + neg) +
                                             " labels, expected " + std::to_string(expected));
        o.require(pos == neg, "labels are not balanced");
        ++splits;
    };
    for (std::uint64_t seed : {1, 2, 3}) {
        SyntheticSpec spec;
        spec.seed = seed;
        spec.n_stocks = 40;
        spec.n_days = 120 + 17 * static_cast<int>(seed);
        spec.headlines_per_day = 20 + static_cast<int>(seed);
        auto c = generate(spec);
        for (const auto& w : rolling_windows(news_sessions(c.news, c.calendar), RollingSpec{60, 30, 30, 0.1})) {
            auto wl = label_window(c.news, c.prices, c.market_instrument, c.calendar, HorizonConfig{}, LabelQuantile{}, w);
            check_split(wl.examples);
        }
    }
    SplitMix64 rng(303);
    for (std::size_t n = 2; n <= 2000; ++n) {
        std::vector<ReturnRecord> r;
        for (std::size_t i = 0; i < n; ++i) r.push_back({i + 1, rng.below(4) == 0 ? 0.0 : rng.normal()});
        check_split(label_training(r, LabelQuantile{}));
    }
    if (o.pass) o.detail = std::to_string(splits) + " train splits";
    return o;
}

// ---------------------------------------------------------------- metrics

Outcome metric_fidelity() {
    Outcome o;
    ConfusionMatrix cm;
    cm.tp = 50;
    cm.fn = 10;
    cm.fp = 20;
    cm.tn = 20;
    o.require(std::abs(accuracy(cm) - 0.7) < 1e-12, "accuracy " + fmt("%.6f", accuracy(cm)));
    o.require(std::abs(mcc(cm) - 0.3564) < 1e-4, "MCC " + fmt("%.6f", mcc(cm)));
    SplitMix64 rng(404);
    for (int i = 0; i < 1000; ++i) {
        ConfusionMatrix m;
        m.tp = 1 + rng.below(200);
        m.fp = rng.below(200);
        m.tn = rng.below(200);
        m.fn = rng.below(200);
        ConfusionMatrix s;
        s.tp = m.tn;
        s.tn = m.tp;
        s.fp = m.fn;
        s.fn = m.fp;
        o.require(accuracy(s) == accuracy(m), "accuracy changes under relabeling");
        o.require(std::abs(mcc(s) - mcc(m)) < 1e-12, "MCC changes under relabeling");
    }
    if (o.pass) o.detail = "accuracy 0.7, MCC " + fmt("%.6f", mcc(cm)) + ", 1000 relabeled matrices";
    return o;
}

Outcome en_calibration() {
    Outcome o;
    SplitMix64 rng(505);
    auto draw = [&] { return std::tanh(0.8 * rng.normal()); };
    std::vector<double> train(200000);
    for (auto& x : train) x = draw();
    std::vector<ScoredNews> test(200000);
    for (std::size_t i = 0; i < test.size(); ++i) {
        test[i].news_id = i;
        test[i].score = draw();
    }
    std::vector<bool> prev(test.size(), false);
    std::string detail;
    for (double n : {1.0, 2.0, 5.0, 10.0}) {
        auto t = percentile_thresholds(train, n);
        std::vector<bool> in(test.size(), false);
        std::size_t size = 0;
        for (const auto& s : select_extreme(test, t)) {
            in[s.news_id] = true;
            ++size;
        }
        for (std::size_t i = 0; i < test.size(); ++i) o.require(!prev[i] || in[i], "E-sets are not nested");
        double pct = 100.0 * static_cast<double>(size) / static_cast<double>(test.size());
        o.require(std::abs(pct - 2 * n) <= 0.5, "n=" + fmt("%g", n) + ": |E| is " + fmt("%.3f", pct) + "%");
        detail += (detail.empty() ? "" : ", ") + fmt("%g", n) + ":" + fmt("%.2f", pct) + "%";
        prev = in;
    }
    if (o.pass) o.detail = "set sizes " + detail;
    return o;
}

// ---------------------------------------------------------------- strategies

Outcome strategy_neutrality() {
    Outcome o;
    SplitMix64 rng(606);
    StrategyConfig cfg;
    std::size_t two_sided = 0;
    for (int i = 0; i < 1000; ++i) {
        Book scores;
        std::size_t names = 2 + rng.below(700);
        for (std::size_t k = 0; k < names; ++k) {
            double s = 2 * rng.uniform() - 1;
            if (rng.below(10) == 0) s = 0;
            scores["S" + std::to_string(k)] = s;
        }
        cfg.unit_notional = 0.5 + 2 * rng.uniform();
        for (auto st : {Strategy::S1, Strategy::S2}) {
            auto b = apply_strategy(st, scores, cfg);
            double net = 0, gross = 0, longs = 0, shorts = 0;
            for (const auto& [t, v] : b) {
                net += v;
                gross += std::abs(v);
                (v > 0 ? longs : shorts) += std::abs(v);
            }
            bool both = longs > 0 && shorts > 0;
            if (both) o.require(std::abs(net) <= 1e-9 * gross, to_string(st) + " book is not dollar-neutral");
            if (st == Strategy::S2 && both) {
                double leg = 20 * cfg.unit_notional;
                o.require(std::abs(longs - leg) <= 1e-9 * leg && std::abs(shorts - leg) <= 1e-9 * leg,
                          "S2 legs differ from 20T");
                ++two_sided;
            }
        }
    }
    if (o.pass) o.detail = "1000 score maps, " + std::to_string(two_sided) + " two-sided S2 books";
    return o;
}

PriceBook random_prices(SplitMix64& rng, const std::vector<Date>& dates, int names) {
    PriceBook prices;
    for (int i = 0; i < names; ++i) {
        PriceSeries s;
        s.instrument = "S" + std::to_string(i);
        double p = 20 + 80 * rng.uniform();
        for (Date d : dates) {
            s.daily_closes.emplace_back(d, p);
            p *= std::exp(0.02 * rng.normal());
        }
        prices[s.instrument] = s;
    }
    return prices;
}

Outcome cost_accounting() {
    Outcome o;
    SplitMix64 rng(707);
    TradingCalendar cal;
    StrategyConfig cfg;
    std::vector<Date> dates{Date{std::chrono::year{2019} / 1 / 7}};
    while (dates.size() < 60) dates.push_back(cal.next_trading_day(dates.back()));
    double worst = 0, worst_general = 0;
    std::size_t ledgers = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int names = 40 + static_cast<int>(rng.below(40));
        auto prices = random_prices(rng, dates, names);
        for (auto st : {Strategy::S1, Strategy::S2}) {
            // Constant-gross books: full-universe S1, two-sided S2.
            std::vector<DailyBook> books;
            for (Date d : dates) {
                Book scores;
                for (int k = 0; k < names; ++k) scores["S" + std::to_string(k)] = 2 * rng.uniform() - 1;
                scores["S0"] = 0.9;
                scores["S1"] = -0.9;
                books.push_back({d, apply_strategy(st, scores, cfg)});
            }
            // Varying-gross books: random sub-universes, some days flat.
            std::vector<DailyBook> ragged;
            for (Date d : dates) {
                Book scores;
                if (rng.below(8) != 0) {
                    for (int k = 0; k < names; ++k) {
                        if (rng.below(3) == 0) scores["S" + std::to_string(k)] = 2 * rng.uniform() - 1;
                    }
                }
                ragged.push_back({d, apply_strategy(st, scores, cfg)});
            }
            for (const auto* set : {&books, &ragged}) {
                auto gross = simulate(*set, prices, cfg, false);
                auto net = simulate(*set, prices, cfg, true);
                o.require(net.cumulative_pnl() <= gross.cumulative_pnl(), "costs increased P&L");
                double turnover = 0, g = 0, ratio = 0;
                bool constant = true;
                for (const auto& r : net.rows) {
                    turnover += r.turnover;
                    g += r.gross;
                    if (r.gross > 0) ratio += r.turnover / r.gross;
                    constant = constant && std::abs(r.gross - net.rows.front().gross) <= 1e-12 * r.gross;
                }
                double days = static_cast<double>(net.rows.size());
                double lhs = annualized_return(net, cfg.trading_days);
                double base = annualized_return(gross, cfg.trading_days);
                // Day-by-day identity, exact for every ledger.
                double general = base - cfg.cost_rate * ratio / days * cfg.trading_days;
                worst_general = std::max(worst_general, std::abs(lhs - general));
                if (set == &books) {
                    o.require(constant, "constant-gross construction produced varying gross");
                    double rhs = base - cfg.cost_rate * (turnover / days) / (g / days) * cfg.trading_days;
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
                ++ledgers;
            }
        }
    }
    o.require(worst <= 1e-9, "net vs gross-minus-cost differs by " + fmt("%.3g", worst));
    o.require(worst_general <= 1e-9, "day-by-day cost identity differs by " + fmt("%.3g", worst_general));
    if (o.pass) {
        o.detail = std::to_string(ledgers) + " ledgers, identity error " + fmt("%.1e", worst) +
                   " (constant gross), per-day identity error " + fmt("%.1e", worst_general) + " (all)";
    }
    return o;
}

// ---------------------------------------------------------------- end to end

struct E2E {
    double e1 = NAN, e10 = NAN;
    std::size_t e1_size = 0;
};

E2E run_pipeline(const SyntheticSpec& spec, ModelKind kind) {
    auto c = generate(spec);
    auto window = rolling_windows(news_sessions(c.news, c.calendar), RollingSpec{360, 240, 240, 0.1}).at(0);
    auto wl = label_window(c.news, c.prices, c.market_instrument, c.calendar, HorizonConfig{}, LabelQuantile{}, window);
    RunConfig cfg;
    cfg.model = kind;
    auto table = random_static_table(synthetic_vocabulary(spec), 16, spec.seed);
    Features f;
    f.table = &table;
    auto model = train_model(cfg, c.news, wl.examples, f);
    auto scored = score_labeled(model, c.news, wl.examples, f);
    auto rows = evaluate_window(to_string(kind), scored, wl.examples, {1, 10});
    backtest_window(to_string(kind), scored, window, c.prices, c.calendar, cfg.strategy, {1});
    return {rows[0].accuracy, rows[1].accuracy, rows[0].set_size};
}

Outcome end_to_end() {
    Outcome o;
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    for (auto kind : {ModelKind::Nbc, ModelKind::RnnStatic}) {
        auto strong = run_pipeline(SyntheticSpec::strong_signal(), kind);
        auto zero = run_pipeline(SyntheticSpec::zero_signal(), kind);
        auto name = to_string(kind);
        o.require(strong.e1 >= 0.9, name + " strong-signal E_1 accuracy " + fmt("%.4f", strong.e1));
        o.require(strong.e1 >= strong.e10, name + " E_1 accuracy below E_10");
        o.require(std::abs(zero.e1 - 0.5) <= 0.05, name + " zero-signal E_1 accuracy " + fmt("%.4f", zero.e1));
        detail += (detail.empty() ? "" : "; ") + name + " strong E_1 " + fmt("%.3f", strong.e1) + " (|E|=" +
                  std::to_string(strong.e1_size) + ") E_10 " + fmt("%.3f", strong.e10) + ", zero E_1 " +
                  fmt("%.3f", zero.e1);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < 600, "took " + fmt("%.0f", secs) + " s");
    if (o.pass) o.detail = detail + "; " + fmt("%.0f", secs) + " s";
    return o;
}

// ---------------------------------------------------------------- determinism

int run_cli(const std::string& args) {
    std::string cmd = std::string("\"") + NEWSALPHA_CLI + "\" " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::map<std::string, std::string> pipeline_digests(const fs::path& dir) {
    fs::remove_all(dir);
    const std::string d = dir.string();
    const std::string cfg = "-c " + d + "/config.ini -s rolling.train_days=60 rolling.test_days=40 ";
    std::vector<std::string> steps{
        "synth -o " + d + " --seed 9 --stocks 30 --days 110 --per-day 20 --vocabulary 300 --layers 12 11 10",
        cfg + "label -o " + d + "/labels.csv",
        cfg + "train -l " + d + "/labels.csv -o " + d + "/nbc.csv",
        cfg + "score -l " + d + "/labels.csv -m " + d + "/nbc.csv -o " + d + "/nbc_scores.csv",
        cfg + "eval -l " + d + "/labels.csv -S " + d + "/nbc_scores.csv -o " + d + "/nbc_eval.csv",
        cfg + "backtest -S " + d + "/nbc_scores.csv -o " + d + "/nbc_bt.csv --ledgers " + d + "/ledgers",
        cfg + "-s model.kind=rnn-static rnn.max_epochs=5 train -l " + d + "/labels.csv -o " + d + "/rnn.bin",
        cfg + "-s model.kind=rnn-static score -l " + d + "/labels.csv -m " + d + "/rnn.bin -o " + d + "/rnn_scores.csv",
        cfg + "-s rnn.max_epochs=2 ablate-layer -l " + d + "/labels.csv -e " + d + "/embeddings_L12.emb " + d +
            "/embeddings_L11.emb " + d + "/embeddings_L10.emb -o " + d + "/ablation.csv",
    };
    for (const auto& s : steps) {
        if (run_cli(s) != 0) throw std::runtime_error("command failed: newsalpha " + s);
    }
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = sha256_file(e.path());
    }
    return out;
}

Outcome determinism() {
    Outcome o;
    auto root = fs::temp_directory_path() / "newsalpha_acceptance";
    auto a = pipeline_digests(root / "run_a");
    auto b = pipeline_digests(root / "run_b");
    o.require(a.size() == b.size(), "runs produced different file sets");
    std::size_t manifests = 0;
    for (const auto& [name, digest] : a) {
        auto it = b.find(name);
        o.require(it != b.end() && it->second == digest, name + " differs between runs");
        manifests += name.ends_with(".manifest.json");
    }
    for (const char* stage : {"news.csv", "labels.csv", "nbc.csv", "nbc_scores.csv", "nbc_eval.csv", "nbc_bt.csv",
                              "rnn.bin", "rnn_scores.csv", "ablation.csv"}) {
        o.require(a.contains(std::string(stage) + ".manifest.json"), std::string(stage) + " has no manifest");
    }
    if (o.pass) {
        o.detail = std::to_string(a.size()) + " files (" + std::to_string(manifests) + " manifests) identical across runs";
    }
    fs::remove_all(root);
    return o;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gradient verification", gradient_verification},
        {"oracle equivalence", oracle_equivalence},
        {"labeling counts", labeling_counts},
        {"metric fidelity", metric_fidelity},
        {"E_n calibration", en_calibration},
        {"strategy neutrality", strategy_neutrality},
        {"cost accounting", cost_accounting},
        {"end-to-end synthetic", end_to_end},
        {"determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
