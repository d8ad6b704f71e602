#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace newsalpha {

/// A tokenized, labeled training headline. `forward_return` is only read by SSESTM.
struct TextExample {
    std::vector<std::string> tokens;
    int label = 0;  // 0 or 1
    double forward_return = 0;
};

/// Multinomial naive Bayes with add-alpha smoothing.
struct NbcModel {
    double alpha = 1.0;
    std::array<double, 2> priors{0.5, 0.5};
    std::array<double, 2> class_totals{0, 0};  // token occurrences per class
    std::map<std::string, std::array<double, 2>> counts;

    bool operator==(const NbcModel&) const = default;
};

/// Throws DegenerateTraining unless both classes are present.
NbcModel nbc_train(const std::vector<TextExample>& examples, double alpha = 1.0);
/// Posterior of class 1; tokens outside the training vocabulary are ignored.
double nbc_score(const NbcModel& model, const std::vector<std::string>& tokens);

struct SsestmParams {
    double alpha_plus = 0.6;
    double alpha_minus = 0.4;
    double kappa = 20;  // minimum number of headlines containing the token
    double lambda = 0.1;
    double grid_step = 1e-3;

    void validate() const;
    bool operator==(const SsestmParams&) const = default;
};

/// Screening + topic-regression sentiment model. `tone[token]` holds
/// (O+, O-); each column sums to one over the screened vocabulary.
struct SsestmModel {
    SsestmParams params;
    std::map<std::string, std::array<double, 2>> tone;

    bool operator==(const SsestmModel&) const = default;
};

/// Positive-label share of the headlines that contain each token, and how many headlines that is.
struct ScreeningStat {
    double positive_share;
    std::size_t doc_count;
};
std::map<std::string, ScreeningStat> ssestm_screening_stats(const std::vector<TextExample>& examples);

/// Throws NoSentimentWords if screening leaves nothing usable.
SsestmModel ssestm_train(const std::vector<TextExample>& examples, const SsestmParams& params = {});

/// Objective maximized by ssestm_score at tone mix p.
double ssestm_objective(const SsestmModel& model, const std::map<std::string, double>& counts, double p);
/// Grid maximizer of the penalized log-likelihood; 0.5 if no screened token occurs.
double ssestm_score(const SsestmModel& model, const std::vector<std::string>& tokens);

/// Versioned CSV bundle `record,key,value_0,value_1`.
void write_nbc(std::ostream& out, const NbcModel& m);
NbcModel read_nbc(std::istream& in);
void write_ssestm(std::ostream& out, const SsestmModel& m);
SsestmModel read_ssestm(std::istream& in);

}  // namespace newsalpha
