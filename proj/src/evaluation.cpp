#include "newsalpha/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace detail {
extern const char* const kStopwordText;
}

double to_score(double p_plus) {
    if (!(p_plus >= 0.0 && p_plus <= 1.0)) {
        throw InvalidProbability("probability " + csv::format_double(p_plus) + " is outside [0, 1]");
    }
    return (p_plus - 0.5) * 2.0;
}

ScoredNews make_scored(std::uint64_t news_id, double p_plus) {
    ScoredNews s;
    s.news_id = news_id;
    s.p_plus = p_plus;
    s.score = to_score(p_plus);
    return s;
}

double nearest_rank(std::span<const double> sorted, double pct) {
    if (sorted.empty()) throw EmptyDataset("percentile of an empty sample");
    double x = pct / 100.0 * static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

ExtremeThresholds percentile_thresholds(std::span<const double> training_scores, double n) {
    if (!(n > 0 && n < 50)) throw ConfigError("extreme-set percent must lie in (0, 50)");
    if (training_scores.empty()) throw EmptyDataset("no training scores for percentile thresholds");
    std::vector<double> sorted(training_scores.begin(), training_scores.end());
    std::sort(sorted.begin(), sorted.end());
    return {n, nearest_rank(sorted, n), nearest_rank(sorted, 100.0 - n)};
}

std::vector<ScoredNews> ExtremeSets::merged() const {
    std::vector<ScoredNews> out = negative;
    out.insert(out.end(), positive.begin(), positive.end());
    return out;
}

ExtremeSets select_extreme_sets(std::span<const ScoredNews> scored, const ExtremeThresholds& t) {
    ExtremeSets sets;
    for (const auto& s : scored) {
        if (s.score < t.lower) {
            sets.negative.push_back(s);
        } else if (s.score > t.upper) {
            sets.positive.push_back(s);
        }
    }
    return sets;
}

std::vector<ScoredNews> select_extreme(std::span<const ScoredNews> scored, const ExtremeThresholds& t) {
    std::vector<ScoredNews> out;
    for (const auto& s : scored) {
        if (s.score < t.lower || s.score > t.upper) out.push_back(s);
    }
    return out;
}

ConfusionMatrix confusion(std::span<const ScoredNews> predictions, std::span<const LabeledExample> labels) {
    if (predictions.size() != labels.size()) {
        throw AlignmentError(std::to_string(predictions.size()) + " predictions vs " + std::to_string(labels.size()) +
                             " labels");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].news_id != labels[i].news_id) {
            throw AlignmentError("position " + std::to_string(i) + ": prediction for news " +
                                 std::to_string(predictions[i].news_id) + ", label for news " +
                                 std::to_string(labels[i].news_id));
        }
        if (labels[i].label == Label::Excluded) {
            throw AlignmentError("news " + std::to_string(labels[i].news_id) + " has no evaluation label");
        }
        bool predicted = predictions[i].score > 0;
        bool actual = labels[i].label == Label::Positive;
        if (predicted && actual) ++cm.tp;
        else if (predicted) ++cm.fp;
        else if (actual) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw EmptyDataset("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double mcc(const ConfusionMatrix& cm) {
    auto d = [](std::size_t v) { return static_cast<double>(v); };
    double a = d(cm.tp + cm.fp), b = d(cm.tp + cm.fn), c = d(cm.tn + cm.fp), e = d(cm.tn + cm.fn);
    if (a == 0 || b == 0 || c == 0 || e == 0) return 0.0;
    return (d(cm.tp) * d(cm.tn) - d(cm.fp) * d(cm.fn)) / std::sqrt(a * b * c * e);
}

WordFrequencies frequent_words(std::span<const std::vector<std::string>> headlines, std::size_t k,
                               const std::set<std::string, std::less<>>& stopwords) {
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& h : headlines) {
        for (const auto& t : h) {
            if (stopwords.contains(t)) continue;
            ++counts[t];
            ++total;
        }
    }
    WordFrequencies out;
    for (const auto& [w, c] : counts) out.emplace_back(w, static_cast<double>(c) / static_cast<double>(total));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (out.size() > k) out.resize(k);
    return out;
}

std::pair<WordFrequencies, WordFrequencies> frequent_words(std::span<const std::vector<std::string>> positive,
                                                           std::span<const std::vector<std::string>> negative,
                                                           std::size_t k,
                                                           const std::set<std::string, std::less<>>& stopwords) {
    return {frequent_words(positive, k, stopwords), frequent_words(negative, k, stopwords)};
}

std::set<std::string, std::less<>> load_stopwords(std::istream& in) {
    std::set<std::string, std::less<>> words;
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        auto e = line.find_last_not_of(" \t\r");
        words.insert(line.substr(b, e - b + 1));
    }
    return words;
}

const std::set<std::string, std::less<>>& default_stopwords() {
    static const auto words = [] {
        std::istringstream in(detail::kStopwordText);
        return load_stopwords(in);
    }();
    return words;
}

std::string default_stopwords_version() {
    std::istringstream in(detail::kStopwordText);
    std::string first;
    std::getline(in, first);
    auto pos = first.find("version ");
    return pos == std::string::npos ? "unknown" : first.substr(pos + 8);
}

std::vector<EvalRow> evaluate_extremes(const std::string& model, std::span<const ScoredNews> training_scores,
                                       std::span<const ScoredNews> test_scores,
                                       std::span<const LabeledExample> test_labels, std::span<const double> ns) {
    std::vector<double> train_values;
    train_values.reserve(training_scores.size());
    for (const auto& s : training_scores) train_values.push_back(s.score);
    std::unordered_map<std::uint64_t, const LabeledExample*> by_id;
    for (const auto& l : test_labels) by_id[l.news_id] = &l;

    std::vector<EvalRow> rows;
    for (double n : ns) {
        auto t = percentile_thresholds(train_values, n);
        auto extreme = select_extreme(test_scores, t);
        std::vector<LabeledExample> aligned;
        aligned.reserve(extreme.size());
        for (const auto& s : extreme) {
            auto it = by_id.find(s.news_id);
            if (it == by_id.end()) throw AlignmentError("no label for scored news " + std::to_string(s.news_id));
            aligned.push_back(*it->second);
        }
        EvalRow row{model, n, extreme.size(), std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
        if (!extreme.empty()) {
            auto cm = confusion(extreme, aligned);
            row.accuracy = accuracy(cm);
            row.mcc = mcc(cm);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_eval_report(std::ostream& out, std::span<const EvalRow> rows) {
    csv::Writer w(out);
    w.row({"model", "n", "set_size", "accuracy", "mcc"});
    for (const auto& r : rows) {
        w.row({r.model, csv::format_double(r.n), std::to_string(r.set_size), csv::format_double(r.accuracy),
               csv::format_double(r.mcc)});
    }
}

std::vector<EvalRow> read_eval_report(std::istream& in) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"model", "n", "set_size", "accuracy", "mcc"});
    std::vector<EvalRow> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 5) throw FormatError("evaluation rows need five fields");
        rows.push_back({f[0], csv::parse_double(f[1]), static_cast<std::size_t>(csv::parse_uint(f[2])),
                        csv::parse_double(f[3]), csv::parse_double(f[4])});
    }
    return rows;
}

void write_scored(std::ostream& out, std::span<const ScoredNews> rows) {
    csv::Writer w(out);
    w.row({"news_id", "timestamp", "ticker", "split", "p_plus", "score"});
    for (const auto& r : rows) {
        w.row({std::to_string(r.news_id), format_instant(r.timestamp), r.ticker, to_string(r.split),
               csv::format_double(r.p_plus), csv::format_double(r.score)});
    }
}

std::vector<ScoredNews> read_scored(std::istream& in) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"news_id", "timestamp", "ticker", "split", "p_plus", "score"});
    std::vector<ScoredNews> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        std::size_t row = reader.record_index() - 1;
        if (f.size() != 6) throw RowError(row, "*", "expected 6 fields");
        try {
            ScoredNews s;
            s.news_id = csv::parse_uint(f[0]);
            s.timestamp = parse_instant(f[1]);
            s.ticker = f[2];
            s.split = split_from_string(f[3]);
            s.p_plus = csv::parse_double(f[4]);
            s.score = csv::parse_double(f[5]);
            rows.push_back(std::move(s));
        } catch (const FormatError& e) {
            throw RowError(row, "*", e.what());
        }
    }
    return rows;
}

}  // namespace newsalpha
