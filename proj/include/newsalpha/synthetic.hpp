#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "newsalpha/calendar.hpp"
#include "newsalpha/corpus.hpp"
#include "newsalpha/embedding_store.hpp"

namespace newsalpha {

struct SyntheticSpec {
    std::uint64_t seed = 7;
    int n_stocks = 120;
    int n_days = 600;
    int headlines_per_day = 100;
    int vocabulary_size = 2000;
    std::vector<std::string> positive_words{"buy", "upgraded", "beats", "raises",
                                            "record", "surges", "outperform", "growth"};
    std::vector<std::string> negative_words{"downgraded", "cut", "misses", "lawsuit",
                                            "plunges", "loss", "warning", "probe"};
    double effect_size = 0.05;        // log-return shock carried by a signal word
    double noise_volatility = 0.01;   // daily log-return volatility
    double signal_probability = 0.5;
    double out_of_hours_fraction = 0.3;
    int min_words = 5;
    int max_words = 10;
    Date start_date = Date{std::chrono::year{2015} / 1 / 5};

    static SyntheticSpec strong_signal();
    static SyntheticSpec zero_signal();
    void validate() const;
};

/// Market instrument written alongside the constituents.
inline constexpr const char* kSyntheticIndex = "INDEX";

struct SyntheticCorpus {
    std::vector<NewsItem> news;
    PriceBook prices;  // constituents plus kSyntheticIndex
    TradingCalendar calendar;
    std::string market_instrument = kSyntheticIndex;
};

/// Weekday sessions 09:00-17:30 Europe/Paris with 30-minute bars. News on the
/// first n_days sessions; two more sessions of prices cover the last forward
/// windows. A signal word moves its stock by exp(+-effect_size) inside the
/// headline's labeling window.
SyntheticCorpus generate(const SyntheticSpec& spec);

/// Vocabulary the generator draws from: background words, signal words, stopwords.
std::vector<std::string> synthetic_vocabulary(const SyntheticSpec& spec);

/// Standard normal vectors for every token, reproducible from the seed.
StaticTable random_static_table(const std::vector<std::string>& tokens, std::size_t dim, std::uint64_t seed);

/// Stand-in for exported transformer states: the static embedding of each
/// headline, zero-padded or truncated to `rows`, tagged as tuned layer `layer`.
std::vector<HeadlineEmbedding> synthetic_layer_embeddings(const std::vector<NewsItem>& news, const StaticTable& table,
                                                          std::uint16_t layer, std::uint16_t rows = 31);

struct SyntheticFiles {
    std::filesystem::path news, daily_prices, minute_prices, calendar;
};

/// Writes news.csv, prices_daily.csv, prices_minute.csv and calendar.txt.
SyntheticFiles write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace newsalpha
