#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "newsalpha/calendar.hpp"
#include "newsalpha/corpus.hpp"
#include "newsalpha/evaluation.hpp"

namespace newsalpha {

struct StrategyConfig {
    int lookback_days = 5;       // A, trading days
    double unit_notional = 1.0;  // T
    int top_k = 20;
    double cost_rate = 4e-4;  // per unit of turnover
    int trading_days = 250;   // D

    void validate() const;
};

enum class Strategy { S1, S2 };
std::string to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);

using Book = std::map<std::string, double, std::less<>>;

/// Mean score per ticker over news published before the close of `as_of`
/// and at most `lookback` trading days old. A headline's trading day is the
/// first session whose close is strictly after its timestamp.
Book aggregate_scores(std::span<const ScoredNews> scored, Date as_of, const TradingCalendar& cal, int lookback);

/// k = min(top_k, floor(#names / 2)) longs at +T and shorts at -T; ties by ticker.
Book strategy_s1(const Book& mean_scores, const StrategyConfig& cfg);
/// Each side sized to top_k * T in proportion to |score|; zero scores excluded.
Book strategy_s2(const Book& mean_scores, const StrategyConfig& cfg);
Book apply_strategy(Strategy s, const Book& mean_scores, const StrategyConfig& cfg);

/// Target positions set at the close of `date`.
struct DailyBook {
    Date date;
    Book positions;
};

/// Books for every trading day in [first, last] from the scores known at each close.
std::vector<DailyBook> build_daily_books(std::span<const ScoredNews> scored, Date first, Date last,
                                         const TradingCalendar& cal, Strategy strategy, const StrategyConfig& cfg);

/// Row d: close-to-close P&L of the book set at the previous close, and the
/// trade from that book to the one set at d's close. The first book opens the
/// ledger and has no row of its own.
struct LedgerRow {
    Date date;
    double gross = 0;
    double pnl = 0;
    double turnover = 0;
    double cost = 0;
    double net_return = 0;
};

struct PortfolioLedger {
    std::vector<LedgerRow> rows;
    bool with_costs = false;

    std::vector<double> returns() const;
    double cumulative_pnl() const;  // net of costs when enabled
};

/// Throws NoPriceCoverage when a held name lacks a close on either side of a day.
PortfolioLedger simulate(std::span<const DailyBook> books, const PriceBook& prices, const StrategyConfig& cfg,
                         bool with_costs);

/// mean(r) * D over every ledger day.
double annualized_return(const PortfolioLedger& ledger, int trading_days);
/// mean(r) / sd(r) * sqrt(D), sample standard deviation. Throws DegenerateSharpe
/// with fewer than two invested days or zero dispersion.
double sharpe(const PortfolioLedger& ledger, int trading_days);

void write_ledger(std::ostream& out, const PortfolioLedger& ledger);
PortfolioLedger read_ledger(std::istream& in);
/// `date,cumulative_pnl` for charting.
void write_cumulative_pnl(std::ostream& out, const PortfolioLedger& ledger);

struct BacktestSummary {
    std::string model;
    Strategy strategy;
    double n;
    bool with_costs;
    double annualized_return;
    double sharpe;  // NaN when degenerate
    double mean_turnover;
    double mean_gross;
};

void write_backtest_summary(std::ostream& out, std::span<const BacktestSummary> rows);

}  // namespace newsalpha
