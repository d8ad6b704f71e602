#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "newsalpha/calendar.hpp"
#include "newsalpha/corpus.hpp"

namespace newsalpha {

struct HorizonConfig {
    std::chrono::milliseconds delta_in{std::chrono::minutes(30)};
    int delta_out_days = 1;  // trading days, measured open to open
    std::chrono::milliseconds minute_grace{std::chrono::minutes(30)};
    int daily_grace_days = 2;  // trading days

    void validate() const;
};

/// Intraday candidates {5, 30, 60, 120} minutes and out-of-hours candidates
/// {1, 2, 3, 5} trading days that a run may select from.
std::vector<HorizonConfig> horizon_grid();

struct LabelQuantile {
    double q = 0.15;
    void validate() const;
};

enum class Label : std::uint8_t { Negative = 0, Positive = 1, Excluded = 2 };
enum class Split : std::uint8_t { Train, Dev, Test };

std::string to_string(Label l);
std::string to_string(Split s);
Label label_from_string(std::string_view s);
Split split_from_string(std::string_view s);

struct LabeledExample {
    std::uint64_t news_id = 0;
    double adjusted_return = 0;
    Label label = Label::Excluded;
    Split split = Split::Train;

    bool operator==(const LabeledExample&) const = default;
};

/// Interval over which a headline's forward return is measured.
struct ForwardWindow {
    Instant start;
    Instant end;
    bool in_hours;

    std::chrono::milliseconds length() const { return end - start; }
};

/// In-hours news: [t, t + delta_in]. Otherwise the window starts at the next
/// market open and ends delta_out trading days later, at that day's open.
ForwardWindow resolve_horizon(const NewsItem& item, const TradingCalendar& cal, const HorizonConfig& cfg);

/// Last observation at or before `t`. Minute bars are preferred when the
/// series has any; otherwise daily closes stamped at the session close.
/// Throws NoPriceCoverage when there is none or it is older than the grace.
double price_at(const PriceSeries& s, Instant t, const TradingCalendar& cal, const HorizonConfig& cfg);

/// P_s(end)/P_s(start) - P_m(end)/P_m(start).
double adjusted_return(const PriceSeries& stock, const PriceSeries& market, Instant start, Instant end,
                       const TradingCalendar& cal, const HorizonConfig& cfg);

struct ReturnRecord {
    std::uint64_t news_id;
    double adjusted_return;
};

struct SkippedNews {
    std::uint64_t news_id;
    std::string reason;
};

struct ReturnComputation {
    std::vector<ReturnRecord> returns;  // input order, skipped items omitted
    std::vector<SkippedNews> skipped;
};

/// Forward market-adjusted return for every headline. Headlines without
/// price coverage (or with an unknown ticker) are reported in `skipped`.
ReturnComputation compute_returns(const std::vector<NewsItem>& news, const PriceBook& prices,
                                  const std::string& market_instrument, const TradingCalendar& cal,
                                  const HorizonConfig& cfg);

/// Number of examples labeled per class: ceil(q * n), capped at floor(n / 2).
std::size_t quantile_count(std::size_t n, double q);

/// Top ceil(q n) returns -> 1, bottom ceil(q n) -> 0, the rest excluded.
/// Ties rank by ascending news_id. Output keeps input order.
std::vector<LabeledExample> label_training(const std::vector<ReturnRecord>& examples, LabelQuantile q);

/// 1 iff return > 0.
std::vector<LabeledExample> label_eval(const std::vector<ReturnRecord>& examples, Split split = Split::Test);

void write_labeled(std::ostream& out, const std::vector<LabeledExample>& rows);
std::vector<LabeledExample> read_labeled(std::istream& in);

}  // namespace newsalpha
