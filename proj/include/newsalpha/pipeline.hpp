#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "newsalpha/backtester.hpp"
#include "newsalpha/baselines.hpp"
#include "newsalpha/calendar.hpp"
#include "newsalpha/corpus.hpp"
#include "newsalpha/embedding_store.hpp"
#include "newsalpha/evaluation.hpp"
#include "newsalpha/labeling.hpp"
#include "newsalpha/rnn.hpp"

namespace newsalpha {

enum class ModelKind { Nbc, Ssestm, RnnStatic, RnnContextual };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view s);

/// Rolling protocol in trading days. The last dev_fraction of each training
/// span is held out as dev.
struct RollingSpec {
    int train_days = 750;
    int test_days = 250;
    int step_days = 250;
    double dev_fraction = 0.1;

    void validate() const;
};

struct Window {
    std::size_t index = 0;
    Date train_first, dev_first, train_last;  // train_last closes the dev span
    Date test_first, test_last;

    std::optional<Split> split_of(Date session) const;
};

/// Windows over `sessions` (ascending trading days). A window needs a full
/// training span and at least one test session; the last test span may be short.
std::vector<Window> rolling_windows(const std::vector<Date>& sessions, const RollingSpec& spec);

/// Every trading day from the first news session to the last.
std::vector<Date> news_sessions(const std::vector<NewsItem>& news, const TradingCalendar& cal);

struct RunConfig {
    std::filesystem::path news, daily_prices, minute_prices, calendar, static_table, embeddings;
    NewsFormat news_format = NewsFormat::Csv;
    std::string market = "INDEX";
    ModelKind model = ModelKind::Nbc;
    HorizonConfig horizon;
    LabelQuantile quantile;
    RollingSpec rolling;
    std::size_t window = 0;
    double nbc_alpha = 1.0;
    SsestmParams ssestm;
    RnnConfig rnn = RnnConfig::desk_scale();
    OovPolicy oov = OovPolicy::Zero;
    StrategyConfig strategy;
    std::vector<double> eval_ns{1, 2, 5, 10};

    void validate() const;
    /// Flat key=value view for manifests.
    std::map<std::string, std::string> describe() const;
};

/// INI text with sections [data] [label] [rolling] [model] [nbc] [ssestm]
/// [rnn] [strategy] [eval]. Unknown keys throw ConfigError. Relative paths
/// resolve against `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
/// Applies one `section.key=value` override.
void set_run_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value,
                          const std::filesystem::path& base_dir = {});

struct MarketData {
    std::vector<NewsItem> news;
    PriceBook prices;
    TradingCalendar calendar;
};

/// Loads news, daily and/or minute prices and the calendar named in cfg.
MarketData load_market_data(const RunConfig& cfg);

struct WindowLabels {
    Window window;
    std::vector<LabeledExample> examples;  // news order, window members only
    std::vector<SkippedNews> skipped;
};

WindowLabels label_window(const std::vector<NewsItem>& news, const PriceBook& prices, const std::string& market,
                          const TradingCalendar& cal, const HorizonConfig& horizon, LabelQuantile quantile,
                          const Window& window);

using EmbeddingMap = std::unordered_map<std::uint64_t, HeadlineEmbedding>;

/// What the neural models read. `table` feeds rnn-static, `embeddings` rnn-contextual.
struct Features {
    const StaticTable* table = nullptr;
    const EmbeddingMap* embeddings = nullptr;
    OovPolicy oov = OovPolicy::Zero;
};

EmbeddingMap index_embeddings(std::vector<HeadlineEmbedding> items);

using TrainedModel = std::variant<NbcModel, SsestmModel, RnnModel>;

/// Trains on non-excluded train rows; RNNs early-stop on the dev rows.
TrainedModel train_model(const RunConfig& cfg, const std::vector<NewsItem>& news,
                         const std::vector<LabeledExample>& labels, const Features& features);

/// P(positive) for one headline. Headlines with nothing to embed score 0.5.
double predict(const TrainedModel& model, const NewsItem& item, const Features& features);

/// Scores every labeled row (all splits, excluded rows included).
std::vector<ScoredNews> score_labeled(const TrainedModel& model, const std::vector<NewsItem>& news,
                                      const std::vector<LabeledExample>& labels, const Features& features);

/// Attaches `news_id,p_plus` scores (e.g. the transformer baseline) to the
/// labeled rows. Throws AlignmentError when a labeled row has no score.
std::vector<ScoredNews> attach_precomputed(std::istream& p_plus_csv, const std::vector<NewsItem>& news,
                                           const std::vector<LabeledExample>& labels);

void write_model(std::ostream& out, const TrainedModel& model);
TrainedModel read_model(std::istream& in, ModelKind kind);

/// E_n rows: thresholds from train and dev scores, sets from test scores.
std::vector<EvalRow> evaluate_window(const std::string& model, const std::vector<ScoredNews>& scored,
                                     const std::vector<LabeledExample>& labels, const std::vector<double>& ns);

struct BacktestRun {
    Strategy strategy;
    double n;
    bool with_costs;
    PortfolioLedger ledger;
    BacktestSummary summary;
};

/// S1 and S2 over the test span using only E_n test headlines, with and
/// without costs, for every n.
std::vector<BacktestRun> backtest_window(const std::string& model, const std::vector<ScoredNews>& scored,
                                         const Window& window, const PriceBook& prices, const TradingCalendar& cal,
                                         const StrategyConfig& strategy, const std::vector<double>& ns);

struct AblationRow {
    std::uint16_t layer;
    EmbeddingSource source;
    double e1_accuracy;
};

/// One contextual RNN per embedding set. Throws IncompatibleArtifacts on
/// repeated layer tags or mixed sources within a set.
std::vector<AblationRow> ablate_layers(const RunConfig& cfg, const std::vector<NewsItem>& news,
                                       const std::vector<LabeledExample>& labels,
                                       const std::vector<std::vector<HeadlineEmbedding>>& layer_sets);

void write_ablation(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace newsalpha
