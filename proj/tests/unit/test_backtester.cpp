#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "newsalpha/backtester.hpp"
#include "newsalpha/errors.hpp"
#include "newsalpha/random.hpp"

using namespace newsalpha;
using namespace std::chrono;

namespace {

Date ymd(int y, int m, int d) { return Date{year{y} / m / d}; }

ScoredNews news_at(Instant t, std::string ticker, double score) {
    ScoredNews s;
    s.timestamp = t;
    s.ticker = std::move(ticker);
    s.score = score;
    s.p_plus = score / 2 + 0.5;
    return s;
}

Book random_scores(SplitMix64& rng, int names) {
    Book b;
    for (int i = 0; i < names; ++i) b["S" + std::to_string(i)] = 2 * rng.uniform() - 1;
    return b;
}

double net_sum(const Book& b) {
    double s = 0;
    for (const auto& [t, v] : b) s += v;
    return s;
}

double gross_of(const Book& b) {
    double s = 0;
    for (const auto& [t, v] : b) s += std::abs(v);
    return s;
}

PriceSeries daily(std::string name, Date first, const std::vector<double>& closes, const TradingCalendar& cal) {
    PriceSeries s;
    s.instrument = std::move(name);
    Date d = first;
    for (double c : closes) {
        s.daily_closes.emplace_back(d, c);
        d = cal.next_trading_day(d);
    }
    return s;
}

PortfolioLedger ledger_of(const std::vector<double>& r) {
    PortfolioLedger l;
    Date d = ymd(2020, 1, 1);
    for (double x : r) {
        LedgerRow row;
        row.date = d;
        row.gross = 1;
        row.pnl = x;
        row.net_return = x;
        l.rows.push_back(row);
        d += days{1};
    }
    return l;
}

}  // namespace

TEST_CASE("config defaults and validation") {
    StrategyConfig c;
    CHECK(c.lookback_days == 5);
    CHECK(c.unit_notional == 1.0);
    CHECK(c.top_k == 20);
    CHECK(c.cost_rate == 4e-4);
    CHECK(c.trading_days == 250);
    CHECK_NOTHROW(c.validate());
    c.top_k = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(strategy_from_string("S2") == Strategy::S2);
    CHECK_THROWS_AS(strategy_from_string("S3"), ConfigError);
}

TEST_CASE("aggregate scores over the lookback window") {
    TradingCalendar cal;  // UTC, 09:00-17:30
    Date mon = ymd(2020, 3, 2);
    Date fri = ymd(2020, 3, 6);
    std::vector<ScoredNews> s{news_at(cal.open_instant(fri) + hours(1), "AAA", 1.0),
                              news_at(cal.open_instant(fri) + hours(2), "AAA", 0.0)};
    auto b = aggregate_scores(s, fri, cal, 5);
    CHECK(b.size() == 1);
    CHECK(b.at("AAA") == 0.5);

    CHECK(aggregate_scores(std::vector<ScoredNews>{}, fri, cal, 5).empty());

    // After the close the headline belongs to the next session.
    std::vector<ScoredNews> late{news_at(cal.close_instant(fri), "BBB", 1.0)};
    CHECK(aggregate_scores(late, fri, cal, 5).empty());
    CHECK(aggregate_scores(late, cal.next_trading_day(fri), cal, 5).size() == 1);

    // Age in trading days: Monday news is 5 days old on the next Monday, 6 on Tuesday.
    std::vector<ScoredNews> old{news_at(cal.open_instant(mon) + hours(1), "CCC", -1.0)};
    Date next_mon = cal.add_trading_days(mon, 5);
    CHECK(aggregate_scores(old, next_mon, cal, 5).size() == 1);
    CHECK(aggregate_scores(old, cal.next_trading_day(next_mon), cal, 5).empty());
}

TEST_CASE("S1 ranking") {
    StrategyConfig cfg;
    Book scores{{"A", 0.9}, {"B", 0.5}, {"C", 0.1}, {"D", -0.2}, {"E", -0.8}};
    auto b = strategy_s1(scores, cfg);
    CHECK(b.at("A") == 1.0);
    CHECK(b.at("B") == 1.0);
    CHECK(b.at("C") == 0.0);
    CHECK(b.at("D") == -1.0);
    CHECK(b.at("E") == -1.0);
    CHECK(gross_of(strategy_s1(Book{}, cfg)) == 0.0);

    SplitMix64 rng(1);
    auto big = strategy_s1(random_scores(rng, 600), cfg);
    int longs = 0, shorts = 0;
    for (const auto& [t, v] : big) {
        longs += v == 1.0;
        shorts += v == -1.0;
    }
    CHECK(longs == 20);
    CHECK(shorts == 20);

    // Ties resolve by ticker.
    Book ties{{"Z", 0.5}, {"A", 0.5}, {"M", 0.5}};
    auto t = strategy_s1(ties, cfg);
    CHECK(t.at("A") == 1.0);
    CHECK(t.at("M") == 0.0);
    CHECK(t.at("Z") == -1.0);
}

TEST_CASE("S2 proportional legs") {
    StrategyConfig cfg;
    auto b = strategy_s2(Book{{"A", 0.6}, {"B", 0.4}, {"C", -1.0}}, cfg);
    CHECK(b.at("A") == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(b.at("B") == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(b.at("C") == doctest::Approx(-20.0).epsilon(1e-14));

    auto single = strategy_s2(Book{{"A", 0.3}}, cfg);
    CHECK(single.size() == 1);
    CHECK(single.at("A") == 20.0);
    CHECK(strategy_s2(Book{{"A", 0.0}, {"B", 0.0}}, cfg).empty());
}

TEST_CASE("books are dollar-neutral and scale-invariant") {
    SplitMix64 rng(2);
    StrategyConfig cfg;
    for (int i = 0; i < 300; ++i) {
        auto scores = random_scores(rng, 2 + static_cast<int>(rng.below(80)));
        auto s1 = strategy_s1(scores, cfg);
        CHECK(std::abs(net_sum(s1)) <= 1e-9 * std::max(1.0, gross_of(s1)));
        auto s2 = strategy_s2(scores, cfg);
        double longs = 0, shorts = 0;
        for (const auto& [t, v] : s2) (v > 0 ? longs : shorts) += std::abs(v);
        if (longs > 0 && shorts > 0) {
            CHECK(std::abs(net_sum(s2)) <= 1e-9 * gross_of(s2));
            CHECK(std::abs(longs - 20) <= 1e-9 * 20);
            CHECK(std::abs(shorts - 20) <= 1e-9 * 20);
        }
        double scale = 0.1 + 5 * rng.uniform();
        Book scaled;
        for (const auto& [t, v] : scores) scaled[t] = v * scale;
        CHECK(strategy_s1(scaled, cfg) == strategy_s1(scores, cfg));
        auto s2s = strategy_s2(scaled, cfg);
        for (const auto& [t, v] : s2) CHECK(std::abs(s2s.at(t) - v) <= 1e-12 * 20);
    }
}

TEST_CASE("turnover and costs") {
    TradingCalendar cal;
    Date d0 = ymd(2020, 3, 2);
    Date d1 = cal.next_trading_day(d0);
    Date d2 = cal.next_trading_day(d1);
    PriceBook prices{{"X", daily("X", d0, {100, 101, 99}, cal)}};
    std::vector<DailyBook> books{{d0, {}}, {d1, {{"X", 10.0}}}, {d2, {{"X", -10.0}}}};
    StrategyConfig cfg;
    auto l = simulate(books, prices, cfg, true);
    REQUIRE(l.rows.size() == 2);
    CHECK(l.rows[0].turnover == 10.0);
    CHECK(l.rows[1].turnover == 20.0);
    CHECK(l.rows[0].cost == doctest::Approx(0.004).epsilon(1e-12));
    CHECK(l.rows[1].cost == doctest::Approx(0.008).epsilon(1e-12));
    CHECK(l.rows[0].gross == 0.0);
    CHECK(l.rows[0].net_return == 0.0);
    CHECK(l.rows[1].gross == 10.0);
    CHECK(l.rows[1].pnl == doctest::Approx(10.0 * (99.0 / 101 - 1)));
    CHECK(l.rows[1].net_return == doctest::Approx((10.0 * (99.0 / 101 - 1) - 0.008) / 10));

    auto free = simulate(books, prices, cfg, false);
    CHECK(free.rows[1].cost == 0.0);
    CHECK(free.cumulative_pnl() >= l.cumulative_pnl());
}

TEST_CASE("flat and neutral books") {
    TradingCalendar cal;
    Date d0 = ymd(2020, 3, 2);
    std::vector<DailyBook> flat;
    for (Date d = d0; flat.size() < 5; d = cal.next_trading_day(d)) flat.push_back({d, {}});
    auto l = simulate(flat, PriceBook{}, StrategyConfig{}, true);
    for (const auto& r : l.rows) {
        CHECK(r.net_return == 0.0);
        CHECK(r.cost == 0.0);
    }

    Date d1 = cal.next_trading_day(d0);
    PriceBook prices{{"L", daily("L", d0, {50, 50.5}, cal)}, {"S", daily("S", d0, {20, 20.2}, cal)}};
    std::vector<DailyBook> books{{d0, {{"L", 1.0}, {"S", -1.0}}}, {d1, {{"L", 1.0}, {"S", -1.0}}}};
    auto n = simulate(books, prices, StrategyConfig{}, false);
    CHECK(std::abs(n.rows[0].pnl) < 1e-15);
    CHECK(n.rows[0].turnover == 0.0);
}

TEST_CASE("missing prices") {
    TradingCalendar cal;
    Date d0 = ymd(2020, 3, 2);
    Date d1 = cal.next_trading_day(d0);
    std::vector<DailyBook> books{{d0, {{"X", 1.0}}}, {d1, {}}};
    CHECK_THROWS_AS(simulate(books, PriceBook{}, StrategyConfig{}, false), NoPriceCoverage);
    PriceBook partial{{"X", daily("X", d0, {10}, cal)}};
    CHECK_THROWS_AS(simulate(books, partial, StrategyConfig{}, false), NoPriceCoverage);
}

TEST_CASE("annualized return and sharpe") {
    auto c = ledger_of(std::vector<double>(50, 0.0004));
    CHECK(annualized_return(c, 250) == doctest::Approx(0.10).epsilon(1e-12));
    CHECK_THROWS_AS(sharpe(c, 250), DegenerateSharpe);

    auto alt = ledger_of({0.01, -0.01, 0.01, -0.01});
    CHECK(sharpe(alt, 250) == 0.0);

    auto three = ledger_of({0.01, 0.02, 0.03});
    CHECK(sharpe(three, 250) == doctest::Approx(2 * std::sqrt(250.0)).epsilon(1e-12));
    CHECK(sharpe(three, 250) == doctest::Approx(31.62).epsilon(1e-3));

    CHECK_THROWS_AS(sharpe(ledger_of({0.01}), 250), DegenerateSharpe);
    CHECK_THROWS_AS(annualized_return(PortfolioLedger{}, 250), EmptyDataset);
}

TEST_CASE("cost identity and cost direction on random constant-gross ledgers") {
    TradingCalendar cal;
    SplitMix64 rng(3);
    StrategyConfig cfg;
    Date d0 = ymd(2019, 1, 7);
    for (int trial = 0; trial < 20; ++trial) {
        const int names = 30, n_days = 40;
        std::vector<Date> dates{d0};
        while (static_cast<int>(dates.size()) < n_days) dates.push_back(cal.next_trading_day(dates.back()));
        PriceBook prices;
        for (int i = 0; i < names; ++i) {
            std::vector<double> closes{20 + 80 * rng.uniform()};
            while (static_cast<int>(closes.size()) < n_days) closes.push_back(closes.back() * std::exp(0.02 * rng.normal()));
            std::string t = "S" + std::to_string(i);
            prices[t] = daily(t, d0, closes, cal);
        }
        std::vector<DailyBook> books;
        for (Date d : dates) {
            Book b = strategy_s1(random_scores(rng, names), cfg);
            std::erase_if(b, [](const auto& kv) { return kv.second == 0; });
            books.push_back({d, b});
        }
        auto gross = simulate(books, prices, cfg, false);
        auto net = simulate(books, prices, cfg, true);
        double mean_turnover = 0, mean_gross = 0;
        for (const auto& r : net.rows) {
            mean_turnover += r.turnover;
            mean_gross += r.gross;
        }
        mean_turnover /= static_cast<double>(net.rows.size());
        mean_gross /= static_cast<double>(net.rows.size());
        double lhs = annualized_return(net, 250);
        double rhs = annualized_return(gross, 250) - cfg.cost_rate * mean_turnover / mean_gross * 250;
        CHECK(std::abs(lhs - rhs) < 1e-9);
        CHECK(net.cumulative_pnl() <= gross.cumulative_pnl());
    }
}

TEST_CASE("books never look ahead") {
    TradingCalendar cal;
    SplitMix64 rng(4);
    StrategyConfig cfg;
    cfg.top_k = 3;
    Date first = ymd(2021, 2, 1);
    Date last = cal.add_trading_days(first, 14);
    std::vector<ScoredNews> news;
    for (int i = 0; i < 400; ++i) {
        Date d = cal.add_trading_days(ymd(2021, 1, 25), static_cast<int>(rng.below(22)));
        Instant t = cal.open_instant(d) - hours(3) + milliseconds(static_cast<long>(rng.below(12 * 3600 * 1000)));
        news.push_back(news_at(t, "S" + std::to_string(rng.below(12)), 2 * rng.uniform() - 1));
    }
    for (auto strategy : {Strategy::S1, Strategy::S2}) {
        auto books = build_daily_books(news, first, last, cal, strategy, cfg);
        REQUIRE(books.size() == 15);
        for (const auto& b : books) {
            Instant cutoff = cal.close_instant(b.date);
            // Book from the reference aggregation.
            Book expected = apply_strategy(strategy, aggregate_scores(news, b.date, cal, cfg.lookback_days), cfg);
            std::erase_if(expected, [](const auto& kv) { return kv.second == 0; });
            REQUIRE(b.positions.size() == expected.size());
            for (const auto& [t, v] : expected) CHECK(std::abs(b.positions.at(t) - v) <= 1e-12 * 20);
            // Replace everything after the close with shuffled noise.
            std::vector<ScoredNews> altered;
            for (const auto& s : news) {
                if (s.timestamp < cutoff) altered.push_back(s);
            }
            std::vector<ScoredNews> future;
            for (const auto& s : news) {
                if (s.timestamp >= cutoff) future.push_back(s);
            }
            shuffle(future.begin(), future.end(), rng);
            for (auto& s : future) {
                s.score = 2 * rng.uniform() - 1;
                altered.push_back(s);
            }
            auto again = build_daily_books(altered, first, b.date, cal, strategy, cfg);
            CHECK(again.back().positions == b.positions);
        }
    }
}

TEST_CASE("ledger and summary files") {
    auto l = ledger_of({0.01, -0.02, 0.005});
    l.rows[1].cost = 0.001;
    l.rows[1].turnover = 2.5;
    std::stringstream buf;
    write_ledger(buf, l);
    CHECK(buf.str().rfind("date,gross,pnl,turnover,cost,net_return\n", 0) == 0);
    auto back = read_ledger(buf);
    REQUIRE(back.rows.size() == 3);
    CHECK(back.with_costs);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.rows[i].date == l.rows[i].date);
        CHECK(back.rows[i].pnl == l.rows[i].pnl);
        CHECK(back.rows[i].cost == l.rows[i].cost);
        CHECK(back.rows[i].net_return == l.rows[i].net_return);
    }
    std::ostringstream cum;
    write_cumulative_pnl(cum, l);
    std::istringstream lines(cum.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "date,cumulative_pnl");
    for (double expected : {0.01, -0.011, -0.006}) {
        REQUIRE(std::getline(lines, line));
        CHECK(std::stod(line.substr(line.find(',') + 1)) == doctest::Approx(expected).epsilon(1e-12));
    }

    BacktestSummary s{"nbc", Strategy::S2, 5, true, 0.1, 1.5, 3, 40};
    std::ostringstream sum;
    write_backtest_summary(sum, std::vector{s});
    CHECK(sum.str() ==
          "model,strategy,n,costs,annualized_return,sharpe,mean_turnover,mean_gross\nnbc,S2,5,yes,0.1,1.5,3,40\n");
}
