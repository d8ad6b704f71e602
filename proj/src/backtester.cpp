#include "newsalpha/backtester.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

void StrategyConfig::validate() const {
    if (lookback_days < 0) throw ConfigError("lookback must be non-negative");
    if (!(unit_notional > 0) || top_k <= 0 || trading_days <= 0) {
        throw ConfigError("unit notional, top_k and trading days must be positive");
    }
    if (!(cost_rate >= 0)) throw ConfigError("cost rate must be non-negative");
}

std::string to_string(Strategy s) { return s == Strategy::S1 ? "S1" : "S2"; }

Strategy strategy_from_string(std::string_view s) {
    if (s == "S1" || s == "s1") return Strategy::S1;
    if (s == "S2" || s == "s2") return Strategy::S2;
    throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

namespace {

int trading_days_between(Date from, Date to, const TradingCalendar& cal) {
    int n = 0;
    while (from < to) {
        from = cal.next_trading_day(from);
        ++n;
    }
    return n;
}

}  // namespace

Book aggregate_scores(std::span<const ScoredNews> scored, Date as_of, const TradingCalendar& cal, int lookback) {
    Instant cutoff = cal.close_instant(as_of);
    std::map<std::string, std::pair<double, int>, std::less<>> acc;
    for (const auto& s : scored) {
        if (s.timestamp >= cutoff) continue;
        Date session = cal.session_of(s.timestamp);
        if (session > as_of || trading_days_between(session, as_of, cal) > lookback) continue;
        auto& a = acc[s.ticker];
        a.first += s.score;
        a.second += 1;
    }
    Book out;
    for (const auto& [ticker, a] : acc) out[ticker] = a.first / a.second;
    return out;
}

Book strategy_s1(const Book& mean_scores, const StrategyConfig& cfg) {
    std::vector<std::pair<std::string, double>> ranked(mean_scores.begin(), mean_scores.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k), ranked.size() / 2);
    Book book;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        double pos = 0;
        if (i < k) pos = cfg.unit_notional;
        else if (i >= ranked.size() - k) pos = -cfg.unit_notional;
        book[ranked[i].first] = pos;
    }
    return book;
}

Book strategy_s2(const Book& mean_scores, const StrategyConfig& cfg) {
    double pos_sum = 0, neg_sum = 0;
    for (const auto& [t, s] : mean_scores) {
        if (s > 0) pos_sum += s;
        else if (s < 0) neg_sum += -s;
    }
    const double leg = cfg.top_k * cfg.unit_notional;
    Book book;
    for (const auto& [t, s] : mean_scores) {
        if (s > 0) book[t] = leg * s / pos_sum;
        else if (s < 0) book[t] = -leg * (-s) / neg_sum;
    }
    return book;
}

Book apply_strategy(Strategy s, const Book& mean_scores, const StrategyConfig& cfg) {
    return s == Strategy::S1 ? strategy_s1(mean_scores, cfg) : strategy_s2(mean_scores, cfg);
}

std::vector<DailyBook> build_daily_books(std::span<const ScoredNews> scored, Date first, Date last,
                                         const TradingCalendar& cal, Strategy strategy, const StrategyConfig& cfg) {
    cfg.validate();
    std::vector<Date> days;
    for (Date d = cal.is_trading_day(first) ? first : cal.next_trading_day(first); d <= last;
         d = cal.next_trading_day(d)) {
        days.push_back(d);
    }
    if (days.empty()) return {};
    // Session index per headline; news tradable before `first` keeps its age.
    struct Entry {
        long session;
        const ScoredNews* news;
    };
    std::vector<Entry> entries;
    entries.reserve(scored.size());
    for (const auto& s : scored) {
        Date session = cal.session_of(s.timestamp);
        long idx;
        if (session < days.front()) {
            idx = -static_cast<long>(trading_days_between(session, days.front(), cal));
            if (-idx > cfg.lookback_days) continue;
        } else {
            auto it = std::lower_bound(days.begin(), days.end(), session);
            if (it == days.end()) continue;
            idx = it - days.begin();
        }
        entries.push_back({idx, &s});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.session < b.session; });

    std::vector<DailyBook> books;
    books.reserve(days.size());
    std::size_t lo = 0, hi = 0;
    for (long d = 0; d < static_cast<long>(days.size()); ++d) {
        while (hi < entries.size() && entries[hi].session <= d) ++hi;
        while (lo < hi && entries[lo].session < d - cfg.lookback_days) ++lo;
        std::map<std::string, std::pair<double, int>, std::less<>> acc;
        for (std::size_t i = lo; i < hi; ++i) {
            auto& a = acc[entries[i].news->ticker];
            a.first += entries[i].news->score;
            a.second += 1;
        }
        Book means;
        for (const auto& [ticker, a] : acc) means[ticker] = a.first / a.second;
        Book book = apply_strategy(strategy, means, cfg);
        std::erase_if(book, [](const auto& kv) { return kv.second == 0; });
        books.push_back({days[static_cast<std::size_t>(d)], std::move(book)});
    }
    return books;
}

std::vector<double> PortfolioLedger::returns() const {
    std::vector<double> r;
    r.reserve(rows.size());
    for (const auto& row : rows) r.push_back(row.net_return);
    return r;
}

double PortfolioLedger::cumulative_pnl() const {
    double total = 0;
    for (const auto& row : rows) total += row.pnl - row.cost;
    return total;
}

PortfolioLedger simulate(std::span<const DailyBook> books, const PriceBook& prices, const StrategyConfig& cfg,
                         bool with_costs) {
    cfg.validate();
    PortfolioLedger ledger;
    ledger.with_costs = with_costs;
    for (std::size_t i = 1; i < books.size(); ++i) {
        const Book& held = books[i - 1].positions;
        const Book& next = books[i].positions;
        LedgerRow row;
        row.date = books[i].date;
        for (const auto& [ticker, pos] : held) {
            if (pos == 0) continue;
            auto missing = [&](Date d) { return NoPriceCoverage(ticker + " has no close on " + format_date(d)); };
            auto it = prices.find(ticker);
            if (it == prices.end()) throw missing(books[i - 1].date);
            auto c0 = it->second.close_on(books[i - 1].date);
            if (!c0) throw missing(books[i - 1].date);
            auto c1 = it->second.close_on(books[i].date);
            if (!c1) throw missing(books[i].date);
            row.gross += std::abs(pos);
            row.pnl += pos * (*c1 / *c0 - 1.0);
        }
        for (const auto& [ticker, pos] : next) {
            auto it = held.find(ticker);
            row.turnover += std::abs(pos - (it == held.end() ? 0.0 : it->second));
        }
        for (const auto& [ticker, pos] : held) {
            if (!next.contains(ticker)) row.turnover += std::abs(pos);
        }
        row.cost = with_costs ? cfg.cost_rate * row.turnover : 0.0;
        row.net_return = row.gross > 0 ? (row.pnl - row.cost) / row.gross : 0.0;
        ledger.rows.push_back(row);
    }
    return ledger;
}

double annualized_return(const PortfolioLedger& ledger, int trading_days) {
    if (ledger.rows.empty()) throw EmptyDataset("empty ledger");
    double sum = 0;
    for (const auto& r : ledger.rows) sum += r.net_return;
    return sum / static_cast<double>(ledger.rows.size()) * trading_days;
}

double sharpe(const PortfolioLedger& ledger, int trading_days) {
    std::size_t invested = 0;
    for (const auto& r : ledger.rows) invested += r.gross > 0 ? 1 : 0;
    if (invested < 2) throw DegenerateSharpe("fewer than two invested days");
    auto r = ledger.returns();
    double n = static_cast<double>(r.size());
    double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    double ss = 0;
    for (double x : r) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / (n - 1));
    if (!(sd > 1e-12 * std::abs(mean)) || sd == 0) throw DegenerateSharpe("daily returns have zero dispersion");
    return mean / sd * std::sqrt(static_cast<double>(trading_days));
}

void write_ledger(std::ostream& out, const PortfolioLedger& ledger) {
    csv::Writer w(out);
    auto d = csv::format_double;
    w.row({"date", "gross", "pnl", "turnover", "cost", "net_return"});
    for (const auto& r : ledger.rows) {
        w.row({format_date(r.date), d(r.gross), d(r.pnl), d(r.turnover), d(r.cost), d(r.net_return)});
    }
}

PortfolioLedger read_ledger(std::istream& in) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"date", "gross", "pnl", "turnover", "cost", "net_return"});
    PortfolioLedger ledger;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 6) throw FormatError("ledger rows need six fields");
        ledger.rows.push_back({parse_date(f[0]), csv::parse_double(f[1]), csv::parse_double(f[2]),
                               csv::parse_double(f[3]), csv::parse_double(f[4]), csv::parse_double(f[5])});
        ledger.with_costs = ledger.with_costs || ledger.rows.back().cost != 0;
    }
    return ledger;
}

void write_cumulative_pnl(std::ostream& out, const PortfolioLedger& ledger) {
    csv::Writer w(out);
    w.row({"date", "cumulative_pnl"});
    double total = 0;
    for (const auto& r : ledger.rows) {
        total += r.pnl - r.cost;
        w.row({format_date(r.date), csv::format_double(total)});
    }
}

void write_backtest_summary(std::ostream& out, std::span<const BacktestSummary> rows) {
    csv::Writer w(out);
    auto d = csv::format_double;
    w.row({"model", "strategy", "n", "costs", "annualized_return", "sharpe", "mean_turnover", "mean_gross"});
    for (const auto& r : rows) {
        w.row({r.model, to_string(r.strategy), d(r.n), r.with_costs ? "yes" : "no", d(r.annualized_return),
               d(r.sharpe), d(r.mean_turnover), d(r.mean_gross)});
    }
}

}  // namespace newsalpha
