#include "newsalpha/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace {

void check_labels(const std::vector<TextExample>& examples) {
    std::array<std::size_t, 2> seen{0, 0};
    for (const auto& e : examples) {
        if (e.label != 0 && e.label != 1) throw DegenerateTraining("labels must be 0 or 1");
        ++seen[e.label];
    }
    if (seen[0] == 0 || seen[1] == 0) throw DegenerateTraining("training data must contain both classes");
}

struct BundleRow {
    std::string record, key, v0, v1;
};

std::vector<BundleRow> read_bundle(std::istream& in, std::string_view format) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"record", "key", "value_0", "value_1"});
    std::vector<BundleRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 4) throw FormatError("model bundle rows need four fields");
        rows.push_back({f[0], f[1], f[2], f[3]});
    }
    if (rows.empty() || rows.front().record != "format" || rows.front().key != format) {
        throw IncompatibleArtifacts("not a " + std::string(format) + " bundle");
    }
    if (rows.front().v0 != "1") throw IncompatibleArtifacts("unsupported bundle version " + rows.front().v0);
    return rows;
}

}  // namespace

NbcModel nbc_train(const std::vector<TextExample>& examples, double alpha) {
    if (!(alpha > 0)) throw ConfigError("NBC smoothing must be positive");
    check_labels(examples);
    NbcModel m;
    m.alpha = alpha;
    std::array<double, 2> docs{0, 0};
    for (const auto& e : examples) {
        docs[e.label] += 1;
        for (const auto& t : e.tokens) {
            m.counts[t][e.label] += 1;
            m.class_totals[e.label] += 1;
        }
    }
    double n = docs[0] + docs[1];
    m.priors = {docs[0] / n, docs[1] / n};
    return m;
}

double nbc_score(const NbcModel& m, const std::vector<std::string>& tokens) {
    double v = static_cast<double>(m.counts.size());
    std::array<double, 2> logp{std::log(m.priors[0]), std::log(m.priors[1])};
    for (const auto& t : tokens) {
        auto it = m.counts.find(t);
        if (it == m.counts.end()) continue;
        for (int c = 0; c < 2; ++c) {
            logp[c] += std::log((it->second[c] + m.alpha) / (m.class_totals[c] + m.alpha * v));
        }
    }
    return 1.0 / (1.0 + std::exp(logp[0] - logp[1]));
}

void SsestmParams::validate() const {
    if (!(alpha_minus >= 0 && alpha_minus <= alpha_plus && alpha_plus <= 1)) {
        throw ConfigError("SSESTM thresholds need 0 <= alpha_minus <= alpha_plus <= 1");
    }
    if (kappa < 0 || lambda < 0) throw ConfigError("SSESTM kappa and lambda must be non-negative");
    if (!(grid_step > 0 && grid_step < 0.5)) throw ConfigError("SSESTM grid step must lie in (0, 0.5)");
}

std::map<std::string, ScreeningStat> ssestm_screening_stats(const std::vector<TextExample>& examples) {
    std::map<std::string, std::array<std::size_t, 2>> docs;
    for (const auto& e : examples) {
        std::set<std::string> uniq(e.tokens.begin(), e.tokens.end());
        for (const auto& t : uniq) ++docs[t][e.label == 1 ? 1 : 0];
    }
    std::map<std::string, ScreeningStat> stats;
    for (const auto& [t, c] : docs) {
        std::size_t total = c[0] + c[1];
        stats[t] = {static_cast<double>(c[1]) / static_cast<double>(total), total};
    }
    return stats;
}

SsestmModel ssestm_train(const std::vector<TextExample>& examples, const SsestmParams& params) {
    params.validate();
    check_labels(examples);

    std::vector<std::string> screened;
    for (const auto& [t, s] : ssestm_screening_stats(examples)) {
        bool charged = s.positive_share >= params.alpha_plus || s.positive_share <= params.alpha_minus;
        if (charged && static_cast<double>(s.doc_count) >= params.kappa) screened.push_back(t);
    }
    if (screened.empty()) throw NoSentimentWords("no token passed screening");
    std::map<std::string, std::size_t> column;
    for (std::size_t j = 0; j < screened.size(); ++j) column[screened[j]] = j;

    // Headlines with at least one screened token form the regression sample.
    struct Doc {
        std::size_t index;
        std::vector<std::pair<std::size_t, double>> freq;  // normalized within the screened vocabulary
    };
    std::vector<Doc> docs;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        std::map<std::size_t, double> counts;
        double total = 0;
        for (const auto& t : examples[i].tokens) {
            auto it = column.find(t);
            if (it == column.end()) continue;
            counts[it->second] += 1;
            total += 1;
        }
        if (total == 0) continue;
        Doc d{i, {}};
        for (auto [j, c] : counts) d.freq.emplace_back(j, c / total);
        docs.push_back(std::move(d));
    }

    // Rank-normalized returns in (0, 1); ties by input order.
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return examples[docs[a].index].forward_return < examples[docs[b].index].forward_return;
    });
    std::vector<double> p_hat(docs.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        p_hat[order[r]] = static_cast<double>(r + 1) / static_cast<double>(docs.size() + 1);
    }

    // Least squares of each token frequency on [p, 1-p] without intercept.
    double spp = 0, spq = 0, sqq = 0;
    for (double p : p_hat) {
        spp += p * p;
        spq += p * (1 - p);
        sqq += (1 - p) * (1 - p);
    }
    double det = spp * sqq - spq * spq;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, spp * sqq))) {
        throw DegenerateTraining("rank-normalized returns do not span the tone regression");
    }
    std::vector<double> hp(screened.size(), 0.0), hq(screened.size(), 0.0);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (auto [j, f] : docs[i].freq) {
            hp[j] += p_hat[i] * f;
            hq[j] += (1 - p_hat[i]) * f;
        }
    }
    std::vector<std::array<double, 2>> coef(screened.size());
    std::array<double, 2> sums{0, 0};
    for (std::size_t j = 0; j < screened.size(); ++j) {
        double plus = (sqq * hp[j] - spq * hq[j]) / det;
        double minus = (spp * hq[j] - spq * hp[j]) / det;
        coef[j] = {std::max(plus, 0.0), std::max(minus, 0.0)};
        sums[0] += coef[j][0];
        sums[1] += coef[j][1];
    }
    if (!(sums[0] > 0) || !(sums[1] > 0)) throw NoSentimentWords("a tone column is identically zero after clipping");

    SsestmModel m;
    m.params = params;
    for (std::size_t j = 0; j < screened.size(); ++j) {
        if (coef[j][0] == 0 && coef[j][1] == 0) continue;  // carries no tone
        m.tone[screened[j]] = {coef[j][0] / sums[0], coef[j][1] / sums[1]};
    }
    return m;
}

double ssestm_objective(const SsestmModel& model, const std::map<std::string, double>& counts, double p) {
    double v = model.params.lambda * std::log(p * (1 - p));
    for (const auto& [t, c] : counts) {
        const auto& o = model.tone.at(t);
        v += c * std::log(p * o[0] + (1 - p) * o[1]);
    }
    return v;
}

double ssestm_score(const SsestmModel& model, const std::vector<std::string>& tokens) {
    std::map<std::string, double> counts;
    for (const auto& t : tokens) {
        if (model.tone.contains(t)) counts[t] += 1;
    }
    if (counts.empty()) return 0.5;
    auto steps = static_cast<long>(std::llround(1.0 / model.params.grid_step));
    double best_p = 0.5;
    double best = -std::numeric_limits<double>::infinity();
    for (long k = 1; k < steps; ++k) {
        double p = static_cast<double>(k) / static_cast<double>(steps);
        double v = ssestm_objective(model, counts, p);
        if (v > best) {
            best = v;
            best_p = p;
        }
    }
    return best_p;
}

void write_nbc(std::ostream& out, const NbcModel& m) {
    csv::Writer w(out);
    auto d = csv::format_double;
    w.row({"record", "key", "value_0", "value_1"});
    w.row({"format", "newsalpha-nbc", "1", ""});
    w.row({"alpha", "", d(m.alpha), ""});
    w.row({"prior", "", d(m.priors[0]), d(m.priors[1])});
    w.row({"total", "", d(m.class_totals[0]), d(m.class_totals[1])});
    for (const auto& [t, c] : m.counts) w.row({"token", t, d(c[0]), d(c[1])});
}

NbcModel read_nbc(std::istream& in) {
    NbcModel m;
    m.counts.clear();
    for (const auto& r : read_bundle(in, "newsalpha-nbc")) {
        if (r.record == "format") continue;
        if (r.record == "alpha") {
            m.alpha = csv::parse_double(r.v0);
        } else if (r.record == "prior") {
            m.priors = {csv::parse_double(r.v0), csv::parse_double(r.v1)};
        } else if (r.record == "total") {
            m.class_totals = {csv::parse_double(r.v0), csv::parse_double(r.v1)};
        } else if (r.record == "token") {
            m.counts[r.key] = {csv::parse_double(r.v0), csv::parse_double(r.v1)};
        } else {
            throw FormatError("unknown NBC record '" + r.record + "'");
        }
    }
    return m;
}

void write_ssestm(std::ostream& out, const SsestmModel& m) {
    csv::Writer w(out);
    auto d = csv::format_double;
    w.row({"record", "key", "value_0", "value_1"});
    w.row({"format", "newsalpha-ssestm", "1", ""});
    w.row({"alpha", "", d(m.params.alpha_plus), d(m.params.alpha_minus)});
    w.row({"kappa", "", d(m.params.kappa), ""});
    w.row({"lambda", "", d(m.params.lambda), ""});
    w.row({"grid_step", "", d(m.params.grid_step), ""});
    for (const auto& [t, o] : m.tone) w.row({"tone", t, d(o[0]), d(o[1])});
}

SsestmModel read_ssestm(std::istream& in) {
    SsestmModel m;
    for (const auto& r : read_bundle(in, "newsalpha-ssestm")) {
        if (r.record == "format") continue;
        if (r.record == "alpha") {
            m.params.alpha_plus = csv::parse_double(r.v0);
            m.params.alpha_minus = csv::parse_double(r.v1);
        } else if (r.record == "kappa") {
            m.params.kappa = csv::parse_double(r.v0);
        } else if (r.record == "lambda") {
            m.params.lambda = csv::parse_double(r.v0);
        } else if (r.record == "grid_step") {
            m.params.grid_step = csv::parse_double(r.v0);
        } else if (r.record == "tone") {
            m.tone[r.key] = {csv::parse_double(r.v0), csv::parse_double(r.v1)};
        } else {
            throw FormatError("unknown SSESTM record '" + r.record + "'");
        }
    }
    m.params.validate();
    return m;
}

}  // namespace newsalpha
