#include "newsalpha/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace chr = std::chrono;

void HorizonConfig::validate() const {
    if (delta_in <= chr::milliseconds::zero()) throw ConfigError("delta_in must be positive");
    if (delta_out_days <= 0) throw ConfigError("delta_out must be a positive number of trading days");
    if (minute_grace < chr::milliseconds::zero() || daily_grace_days < 0) {
        throw ConfigError("price grace windows must be non-negative");
    }
}

std::vector<HorizonConfig> horizon_grid() {
    std::vector<HorizonConfig> grid;
    for (int minutes : {5, 30, 60, 120}) {
        for (int days : {1, 2, 3, 5}) {
            HorizonConfig c;
            c.delta_in = chr::minutes(minutes);
            c.delta_out_days = days;
            grid.push_back(c);
        }
    }
    return grid;
}

void LabelQuantile::validate() const {
    if (!(q > 0 && q <= 0.5)) throw ConfigError("label quantile must lie in (0, 0.5]");
}

std::string to_string(Label l) {
    switch (l) {
        case Label::Negative: return "0";
        case Label::Positive: return "1";
        case Label::Excluded: return "excluded";
    }
    return "?";
}

std::string to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
    }
    return "?";
}

Label label_from_string(std::string_view s) {
    if (s == "0") return Label::Negative;
    if (s == "1") return Label::Positive;
    if (s == "excluded") return Label::Excluded;
    throw FormatError("bad label '" + std::string(s) + "'");
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    throw FormatError("bad split '" + std::string(s) + "'");
}

ForwardWindow resolve_horizon(const NewsItem& item, const TradingCalendar& cal, const HorizonConfig& cfg) {
    if (is_trading_hours(item.timestamp, cal)) {
        return {item.timestamp, item.timestamp + cfg.delta_in, true};
    }
    Instant anchor = cal.next_open_after(item.timestamp);
    Date end_day = cal.add_trading_days(cal.local_date(anchor), cfg.delta_out_days);
    return {anchor, cal.open_instant(end_day), false};
}

double price_at(const PriceSeries& s, Instant t, const TradingCalendar& cal, const HorizonConfig& cfg) {
    auto fail = [&](const std::string& why) {
        return NoPriceCoverage(s.instrument + " at " + format_instant(t) + ": " + why);
    };
    if (!s.minute_bars.empty()) {
        auto it = std::upper_bound(s.minute_bars.begin(), s.minute_bars.end(), t,
                                   [](Instant key, const PricePoint& p) { return key < p.time; });
        if (it == s.minute_bars.begin()) throw fail("no observation at or before");
        --it;
        if (t - it->time > cfg.minute_grace) throw fail("last minute bar is stale");
        return it->price;
    }
    // Daily closes are observed at the close instant of their date.
    auto it = std::upper_bound(s.daily_closes.begin(), s.daily_closes.end(), t,
                               [&](Instant key, const auto& p) { return key < cal.close_instant(p.first); });
    if (it == s.daily_closes.begin()) throw fail("no observation at or before");
    --it;
    if (cal.add_trading_days(it->first, cfg.daily_grace_days) < cal.local_date(t)) {
        throw fail("last daily close is stale");
    }
    return it->second;
}

double adjusted_return(const PriceSeries& stock, const PriceSeries& market, Instant start, Instant end,
                       const TradingCalendar& cal, const HorizonConfig& cfg) {
    double s0 = price_at(stock, start, cal, cfg);
    double s1 = price_at(stock, end, cal, cfg);
    double m0 = price_at(market, start, cal, cfg);
    double m1 = price_at(market, end, cal, cfg);
    return s1 / s0 - m1 / m0;
}

ReturnComputation compute_returns(const std::vector<NewsItem>& news, const PriceBook& prices,
                                  const std::string& market_instrument, const TradingCalendar& cal,
                                  const HorizonConfig& cfg) {
    cfg.validate();
    auto market = prices.find(market_instrument);
    if (market == prices.end()) throw NoPriceCoverage("market instrument '" + market_instrument + "' has no prices");
    ReturnComputation out;
    out.returns.reserve(news.size());
    for (const auto& item : news) {
        auto stock = prices.find(item.ticker);
        if (stock == prices.end()) {
            out.skipped.push_back({item.id, "no prices for ticker " + item.ticker});
            continue;
        }
        ForwardWindow w = resolve_horizon(item, cal, cfg);
        try {
            out.returns.push_back({item.id, adjusted_return(stock->second, market->second, w.start, w.end, cal, cfg)});
        } catch (const NoPriceCoverage& e) {
            out.skipped.push_back({item.id, e.what()});
        }
    }
    return out;
}

std::size_t quantile_count(std::size_t n, double q) {
    double x = q * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
    return std::min(k, n / 2);
}

std::vector<LabeledExample> label_training(const std::vector<ReturnRecord>& examples, LabelQuantile q) {
    q.validate();
    if (examples.empty()) throw EmptyDataset("no training examples to label");
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = examples[a];
        const auto& y = examples[b];
        if (x.adjusted_return != y.adjusted_return) return x.adjusted_return < y.adjusted_return;
        return x.news_id < y.news_id;
    });
    std::vector<LabeledExample> out(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        out[i] = {examples[i].news_id, examples[i].adjusted_return, Label::Excluded, Split::Train};
    }
    std::size_t k = quantile_count(examples.size(), q.q);
    for (std::size_t i = 0; i < k; ++i) {
        out[order[i]].label = Label::Negative;
        out[order[order.size() - 1 - i]].label = Label::Positive;
    }
    return out;
}

std::vector<LabeledExample> label_eval(const std::vector<ReturnRecord>& examples, Split split) {
    if (split == Split::Train) throw ConfigError("label_eval is for dev/test splits");
    std::vector<LabeledExample> out;
    out.reserve(examples.size());
    for (const auto& e : examples) {
        out.push_back({e.news_id, e.adjusted_return, e.adjusted_return > 0 ? Label::Positive : Label::Negative, split});
    }
    return out;
}

void write_labeled(std::ostream& out, const std::vector<LabeledExample>& rows) {
    csv::Writer w(out);
    w.row({"news_id", "adjusted_return", "label", "split"});
    for (const auto& r : rows) {
        w.row({std::to_string(r.news_id), csv::format_double(r.adjusted_return), to_string(r.label),
               to_string(r.split)});
    }
}

std::vector<LabeledExample> read_labeled(std::istream& in) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"news_id", "adjusted_return", "label", "split"});
    std::vector<LabeledExample> rows;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        std::size_t row = reader.record_index() - 1;
        if (f.size() != 4) throw RowError(row, "*", "expected 4 fields");
        try {
            LabeledExample e{csv::parse_uint(f[0]), csv::parse_double(f[1]), label_from_string(f[2]),
                             split_from_string(f[3])};
            if (e.split != Split::Train && e.label == Label::Excluded) {
                throw FormatError("dev/test rows cannot be excluded");
            }
            rows.push_back(e);
        } catch (const FormatError& e) {
            throw RowError(row, "*", e.what());
        }
    }
    return rows;
}

}  // namespace newsalpha
