#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "newsalpha/artifacts.hpp"
#include "newsalpha/backtester.hpp"
#include "newsalpha/baselines.hpp"
#include "newsalpha/corpus.hpp"
#include "newsalpha/embedding_store.hpp"
#include "newsalpha/errors.hpp"
#include "newsalpha/evaluation.hpp"
#include "newsalpha/labeling.hpp"
#include "newsalpha/pipeline.hpp"
#include "newsalpha/random.hpp"
#include "newsalpha/rnn.hpp"
#include "newsalpha/synthetic.hpp"

namespace py = pybind11;
using namespace newsalpha;

namespace {

std::vector<TextExample> text_examples(const std::vector<std::vector<std::string>>& docs, const std::vector<int>& labels,
                                       const std::vector<double>& returns) {
    if (docs.size() != labels.size()) throw ShapeError("one label per document is required");
    if (!returns.empty() && returns.size() != docs.size()) throw ShapeError("one return per document is required");
    std::vector<TextExample> out;
    for (std::size_t i = 0; i < docs.size(); ++i) out.push_back({docs[i], labels[i], returns.empty() ? 0.0 : returns[i]});
    return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IngestError("cannot open " + p.string());
    return f;
}

py::dict embedding_to_dict(const HeadlineEmbedding& e) {
    py::array_t<float> m({static_cast<py::ssize_t>(e.rows), static_cast<py::ssize_t>(e.cols)});
    std::copy(e.values.begin(), e.values.end(), m.mutable_data());
    py::dict d;
    d["news_id"] = e.news_id;
    d["source"] = to_string(e.source);
    d["layer"] = e.layer;
    d["matrix"] = m;
    return d;
}

HeadlineEmbedding embedding_from_dict(const py::dict& d) {
    HeadlineEmbedding e;
    e.news_id = d["news_id"].cast<std::uint64_t>();
    e.source = embedding_source_from_string(d["source"].cast<std::string>());
    e.layer = d["layer"].cast<std::uint16_t>();
    auto m = py::array_t<float, py::array::c_style | py::array::forcecast>::ensure(d["matrix"]);
    if (!m || m.ndim() != 2) throw ShapeError("matrix must be two-dimensional");
    if (m.shape(0) > 0xFFFF || m.shape(1) > 0xFFFF) throw ShapeError("matrix too large for the embedding format");
    e.rows = static_cast<std::uint16_t>(m.shape(0));
    e.cols = static_cast<std::uint16_t>(m.shape(1));
    e.values.assign(m.data(), m.data() + m.size());
    return e;
}

}  // namespace

PYBIND11_MODULE(_newsalpha, m) {
    m.doc() = "News sentiment labeling, classification and backtesting";
    m.attr("__version__") = NEWSALPHA_VERSION;

    static py::exception<Error> base(m, "NewsalphaError");
    static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
    static py::exception<FormatError> data_error(m, "DataError", base.ptr());
    static py::exception<IncompatibleArtifacts> incompatible(m, "IncompatibleArtifacts", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            switch (e.error_class()) {
                case ErrorClass::Config: py::set_error(config_error, e.what()); break;
                case ErrorClass::Data: py::set_error(data_error, e.what()); break;
                case ErrorClass::Incompatible: py::set_error(incompatible, e.what()); break;
            }
        }
    });

    m.def("tokenize", [](const std::string& s) { return tokenize(s); }, py::arg("headline"));

    m.def(
        "read_news",
        [](const std::filesystem::path& path, const std::string& format) {
            auto f = open_in(path);
            py::list out;
            for (const auto& n : parse_news(f, news_format_from_tag(format))) {
                py::dict d;
                d["id"] = n.id;
                d["timestamp"] = format_instant(n.timestamp);
                d["ticker"] = n.ticker;
                d["headline"] = n.headline;
                d["vendor_score"] = n.vendor_score ? py::cast(*n.vendor_score) : py::none();
                d["vendor_confidence"] = n.vendor_confidence ? py::cast(*n.vendor_confidence) : py::none();
                out.append(d);
            }
            return out;
        },
        py::arg("path"), py::arg("format") = "csv");

    m.def("quantile_count", &quantile_count, py::arg("n"), py::arg("q") = 0.15);
    m.def(
        "label_training",
        [](const std::vector<std::pair<std::uint64_t, double>>& rows, double q) {
            std::vector<ReturnRecord> r;
            for (const auto& [id, ret] : rows) r.push_back({id, ret});
            std::vector<std::pair<std::uint64_t, std::string>> out;
            for (const auto& e : label_training(r, LabelQuantile{q})) out.emplace_back(e.news_id, to_string(e.label));
            return out;
        },
        py::arg("returns"), py::arg("q") = 0.15, "Labels (news_id, return) pairs; returns (news_id, label).");

    py::class_<NbcModel>(m, "NbcModel")
        .def_static(
            "train",
            [](const std::vector<std::vector<std::string>>& docs, const std::vector<int>& labels, double alpha) {
                return nbc_train(text_examples(docs, labels, {}), alpha);
            },
            py::arg("docs"), py::arg("labels"), py::arg("alpha") = 1.0)
        .def("score", [](const NbcModel& mdl, const std::vector<std::string>& t) { return nbc_score(mdl, t); })
        .def_property_readonly("priors", [](const NbcModel& mdl) { return mdl.priors; })
        .def_property_readonly("vocabulary_size", [](const NbcModel& mdl) { return mdl.counts.size(); });

    py::class_<SsestmModel>(m, "SsestmModel")
        .def_static(
            "train",
            [](const std::vector<std::vector<std::string>>& docs, const std::vector<int>& labels,
               const std::vector<double>& returns, double alpha_plus, double alpha_minus, double kappa, double lambda) {
                SsestmParams p;
                p.alpha_plus = alpha_plus;
                p.alpha_minus = alpha_minus;
                p.kappa = kappa;
                p.lambda = lambda;
                return ssestm_train(text_examples(docs, labels, returns), p);
            },
            py::arg("docs"), py::arg("labels"), py::arg("returns"), py::arg("alpha_plus") = 0.6,
            py::arg("alpha_minus") = 0.4, py::arg("kappa") = 20.0, py::arg("lambda_") = 0.1)
        .def("score", [](const SsestmModel& mdl, const std::vector<std::string>& t) { return ssestm_score(mdl, t); })
        .def_property_readonly("tone", [](const SsestmModel& mdl) { return mdl.tone; });

    m.def("to_score", &to_score, py::arg("p_plus"));
    m.def(
        "percentile_thresholds",
        [](const std::vector<double>& scores, double n) {
            auto t = percentile_thresholds(scores, n);
            return std::make_pair(t.lower, t.upper);
        },
        py::arg("scores"), py::arg("n"));
    m.def(
        "accuracy",
        [](std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
            return accuracy(ConfusionMatrix{tp, fp, tn, fn});
        },
        py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"));
    m.def(
        "mcc",
        [](std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) { return mcc(ConfusionMatrix{tp, fp, tn, fn}); },
        py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"));

    auto strategy_cfg = [](int top_k, double unit) {
        StrategyConfig c;
        c.top_k = top_k;
        c.unit_notional = unit;
        c.validate();
        return c;
    };
    m.def(
        "strategy_s1",
        [strategy_cfg](const std::map<std::string, double>& scores, int top_k, double unit) {
            auto b = strategy_s1(Book(scores.begin(), scores.end()), strategy_cfg(top_k, unit));
            return std::map<std::string, double>(b.begin(), b.end());
        },
        py::arg("scores"), py::arg("top_k") = 20, py::arg("unit_notional") = 1.0);
    m.def(
        "strategy_s2",
        [strategy_cfg](const std::map<std::string, double>& scores, int top_k, double unit) {
            auto b = strategy_s2(Book(scores.begin(), scores.end()), strategy_cfg(top_k, unit));
            return std::map<std::string, double>(b.begin(), b.end());
        },
        py::arg("scores"), py::arg("top_k") = 20, py::arg("unit_notional") = 1.0);

    auto ledger_of = [](const std::vector<double>& r) {
        PortfolioLedger l;
        for (double x : r) {
            LedgerRow row;
            row.gross = 1;
            row.net_return = x;
            l.rows.push_back(row);
        }
        return l;
    };
    m.def(
        "annualized_return", [ledger_of](const std::vector<double>& r, int d) { return annualized_return(ledger_of(r), d); },
        py::arg("daily_returns"), py::arg("trading_days") = 250);
    m.def(
        "sharpe", [ledger_of](const std::vector<double>& r, int d) { return sharpe(ledger_of(r), d); },
        py::arg("daily_returns"), py::arg("trading_days") = 250);

    m.def(
        "read_embeddings",
        [](const std::filesystem::path& path) {
            auto f = open_in(path);
            py::list out;
            for (const auto& e : read_embeddings(f)) out.append(embedding_to_dict(e));
            return out;
        },
        py::arg("path"), "Records as dicts with news_id, source, layer and a float32 matrix.");
    m.def(
        "write_embeddings",
        [](const std::filesystem::path& path, const py::list& records) {
            std::vector<HeadlineEmbedding> items;
            for (const auto& r : records) items.push_back(embedding_from_dict(r.cast<py::dict>()));
            std::ofstream f(path, std::ios::binary);
            if (!f) throw FormatError("cannot write " + path.string());
            write_embeddings(items, f);
        },
        py::arg("path"), py::arg("records"));

    m.def(
        "rnn_gradient_check",
        [](const std::string& cell, const std::vector<int>& widths, std::size_t input_dim, std::uint64_t seed) {
            RnnConfig cfg;
            cfg.cell = cell_kind_from_string(cell);
            cfg.layer_widths = widths;
            cfg.dropout = 0;
            RnnModel model(cfg, input_dim);
            model.initialize(seed);
            SplitMix64 rng(seed + 1);
            std::vector<LabeledSequence> batch;
            for (int i = 0; i < 4; ++i) {
                Sequence s{1 + rng.below(5), input_dim, {}};
                for (std::size_t k = 0; k < s.steps * s.dim; ++k) s.values.push_back(rng.normal());
                batch.push_back({s, i % 2});
            }
            return gradient_check(model, batch);
        },
        py::arg("cell"), py::arg("widths"), py::arg("input_dim"), py::arg("seed") = 1,
        "Max relative error between analytic and numerical gradients on a random batch.");

    m.def(
        "generate_synthetic",
        [](const std::filesystem::path& out_dir, std::uint64_t seed, int n_stocks, int n_days, int per_day,
           int vocabulary, double effect, double noise) {
            SyntheticSpec spec;
            spec.seed = seed;
            spec.n_stocks = n_stocks;
            spec.n_days = n_days;
            spec.headlines_per_day = per_day;
            spec.vocabulary_size = vocabulary;
            spec.effect_size = effect;
            spec.noise_volatility = noise;
            spec.validate();
            auto files = write_synthetic(generate(spec), out_dir);
            std::map<std::string, std::filesystem::path> out{{"news", files.news},
                                                             {"daily_prices", files.daily_prices},
                                                             {"minute_prices", files.minute_prices},
                                                             {"calendar", files.calendar}};
            return out;
        },
        py::arg("out_dir"), py::arg("seed") = 7, py::arg("n_stocks") = 120, py::arg("n_days") = 600,
        py::arg("headlines_per_day") = 100, py::arg("vocabulary_size") = 2000, py::arg("effect_size") = 0.05,
        py::arg("noise_volatility") = 0.01);

    m.def("sha256_file", &sha256_file, py::arg("path"));
}
