#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "newsalpha/calendar.hpp"

namespace newsalpha {

struct NewsItem {
    std::uint64_t id = 0;
    Instant timestamp{};
    std::string ticker;
    std::string headline;
    std::optional<int> vendor_score;       // -1, 0, +1
    std::optional<int> vendor_confidence;  // 0..100

    bool operator==(const NewsItem&) const = default;
};

enum class NewsFormat { Csv, JsonLines };

NewsFormat news_format_from_tag(std::string_view tag);

struct RowDiagnostic {
    std::size_t row;
    std::string field;
    std::string reason;
};

struct NewsParseResult {
    std::vector<NewsItem> items;
    std::vector<RowDiagnostic> rejected;
};

/// Strict parse: the first record that fails validation throws RowError.
/// An unreadable stream throws IngestError.
std::vector<NewsItem> parse_news(std::istream& in, NewsFormat format);
/// Lenient parse: invalid records are collected in `rejected` and skipped.
NewsParseResult parse_news_lenient(std::istream& in, NewsFormat format);

void write_news(std::ostream& out, const std::vector<NewsItem>& items, NewsFormat format);

/// Throws RowError(row, ...) if `item` violates a NewsItem invariant.
void validate_news_item(const NewsItem& item, std::size_t row);

/// Lowercase, strip punctuation, split on whitespace.
std::vector<std::string> tokenize(std::string_view headline);

struct PricePoint {
    Instant time;
    double price;
};

/// Daily closes are stamped at the session close instant of their date.
struct PriceSeries {
    std::string instrument;
    std::vector<std::pair<Date, double>> daily_closes;
    std::vector<PricePoint> minute_bars;

    /// Close on exactly `d`, if recorded.
    std::optional<double> close_on(Date d) const;
};

/// Throws FormatError unless prices are positive and timestamps strictly increasing.
void validate_price_series(const PriceSeries& s);

using PriceBook = std::map<std::string, PriceSeries, std::less<>>;

/// Reads `instrument,timestamp,price`. Daily files use `YYYY-MM-DD` (or an
/// RFC-3339 instant whose UTC date is taken) in the timestamp column.
void read_daily_prices(std::istream& in, PriceBook& book);
void read_minute_prices(std::istream& in, PriceBook& book);
void write_daily_prices(std::ostream& out, const PriceBook& book);
void write_minute_prices(std::ostream& out, const PriceBook& book);

}  // namespace newsalpha
