#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsalpha/calendar.hpp"
#include "newsalpha/labeling.hpp"

namespace newsalpha {

/// Model output for one headline. score = (p_plus - 0.5) * 2.
struct ScoredNews {
    std::uint64_t news_id = 0;
    double p_plus = 0.5;
    double score = 0;
    Instant timestamp{};
    std::string ticker;
    Split split = Split::Test;

    bool operator==(const ScoredNews&) const = default;
};

/// Throws InvalidProbability outside [0, 1].
double to_score(double p_plus);
ScoredNews make_scored(std::uint64_t news_id, double p_plus);

/// Nearest-rank percentile: the value at 1-based rank ceil(pct/100 * m) of `sorted`.
double nearest_rank(std::span<const double> sorted, double pct);

struct ExtremeThresholds {
    double n = 1;
    double lower = 0;  // P_n
    double upper = 0;  // P_{100-n}
};

/// Throws EmptyDataset on no scores and ConfigError unless 0 < n < 50.
ExtremeThresholds percentile_thresholds(std::span<const double> training_scores, double n);

/// {score < lower} and {score > upper}, input order preserved.
struct ExtremeSets {
    std::vector<ScoredNews> negative;
    std::vector<ScoredNews> positive;

    std::size_t size() const { return negative.size() + positive.size(); }
    std::vector<ScoredNews> merged() const;
};
ExtremeSets select_extreme_sets(std::span<const ScoredNews> scored, const ExtremeThresholds& t);
std::vector<ScoredNews> select_extreme(std::span<const ScoredNews> scored, const ExtremeThresholds& t);

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Prediction is 1 iff score > 0. `labels` must be id-aligned with `predictions`
/// (AlignmentError otherwise) and carry 0/1 labels.
ConfusionMatrix confusion(std::span<const ScoredNews> predictions, std::span<const LabeledExample> labels);

/// Throws EmptyDataset on an empty matrix.
double accuracy(const ConfusionMatrix& cm);
/// 0 when any factor of the denominator is zero.
double mcc(const ConfusionMatrix& cm);

using WordFrequencies = std::vector<std::pair<std::string, double>>;

/// Relative frequency of each non-stopword token within a set of tokenized
/// headlines; top k by frequency, ties in lexicographic order.
WordFrequencies frequent_words(std::span<const std::vector<std::string>> headlines, std::size_t k,
                               const std::set<std::string, std::less<>>& stopwords);
std::pair<WordFrequencies, WordFrequencies> frequent_words(std::span<const std::vector<std::string>> positive,
                                                           std::span<const std::vector<std::string>> negative,
                                                           std::size_t k,
                                                           const std::set<std::string, std::less<>>& stopwords);

/// The bundled English stopword list.
const std::set<std::string, std::less<>>& default_stopwords();
std::string default_stopwords_version();
/// One word per line; `#` comments and blank lines ignored.
std::set<std::string, std::less<>> load_stopwords(std::istream& in);

struct EvalRow {
    std::string model;
    double n = 0;
    std::size_t set_size = 0;
    double accuracy = 0;  // NaN for an empty set
    double mcc = 0;
};

/// One row per n: thresholds from the training-window scores, E-set drawn
/// from the test scores.
std::vector<EvalRow> evaluate_extremes(const std::string& model, std::span<const ScoredNews> training_scores,
                                       std::span<const ScoredNews> test_scores,
                                       std::span<const LabeledExample> test_labels, std::span<const double> ns);

void write_eval_report(std::ostream& out, std::span<const EvalRow> rows);
std::vector<EvalRow> read_eval_report(std::istream& in);

/// Scored CSV `news_id,timestamp,ticker,split,p_plus,score`.
void write_scored(std::ostream& out, std::span<const ScoredNews> rows);
std::vector<ScoredNews> read_scored(std::istream& in);

}  // namespace newsalpha
