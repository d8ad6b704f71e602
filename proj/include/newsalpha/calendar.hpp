#pragma once

#include <chrono>
#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace newsalpha {

/// UTC instant with millisecond precision.
using Instant = std::chrono::sys_time<std::chrono::milliseconds>;
/// A calendar date. Interpreted in whatever zone the caller says it is.
using Date = std::chrono::sys_days;

/// Parses RFC-3339 (`2015-06-20T05:14:01.096Z`, `...+02:00`, fraction optional).
Instant parse_instant(std::string_view text);
/// Formats as `YYYY-MM-DDTHH:MM:SS.mmmZ`.
std::string format_instant(Instant t);

Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Parses `HH:MM` or `HH:MM:SS`.
std::chrono::seconds parse_time_of_day(std::string_view text);

/// Time zone with daylight-saving rules.
///
/// Accepts an IANA name (`Europe/Paris`, resolved from the system zoneinfo
/// directory; the zone's current POSIX rule is used for all dates), a POSIX TZ
/// rule string (`CET-1CEST,M3.5.0,M10.5.0/3`), or a fixed offset (`UTC`,
/// `+01:00`).
class TimeZone {
public:
    TimeZone();  // UTC
    static TimeZone named(const std::string& spec);

    const std::string& spec() const noexcept { return spec_; }

    /// Offset of local time from UTC at instant t.
    std::chrono::seconds offset_at(Instant t) const;
    /// Wall-clock local time at instant t, expressed on the sys_time axis.
    Instant to_local(Instant t) const;
    /// UTC instant of local wall-clock time. Non-existent local times (DST gap)
    /// are shifted forward by the gap; ambiguous ones resolve to the earlier.
    Instant from_local(Date local_date, std::chrono::seconds time_of_day) const;

    class Impl;

private:
    std::string spec_;
    std::shared_ptr<const Impl> impl_;
};

/// Exchange session definition: daily half-open [open, close) in `zone`,
/// Monday to Friday except `holidays` (local dates).
struct TradingCalendar {
    std::chrono::seconds open_time{9 * 3600};
    std::chrono::seconds close_time{17 * 3600 + 30 * 60};
    TimeZone zone;
    std::set<Date> holidays;

    /// Key-value text: `open=09:00`, `close=17:30`, `zone=Europe/Paris`,
    /// `holidays=YYYY-MM-DD,...`. Blank lines and `#` comments ignored.
    static TradingCalendar parse(std::istream& in);
    void write(std::ostream& out) const;

    Date local_date(Instant t) const;
    bool is_trading_day(Date d) const;
    Instant open_instant(Date d) const;
    Instant close_instant(Date d) const;

    /// First trading day strictly after d.
    Date next_trading_day(Date d) const;
    /// n-th trading day after d (n >= 0; n == 0 returns d unchanged).
    Date add_trading_days(Date d, int n) const;
    /// First trading day whose close is strictly after t.
    Date session_of(Instant t) const;
    /// Open of the first session starting strictly after t.
    Instant next_open_after(Instant t) const;
};

/// True iff t falls in [open, close) local time on a non-holiday weekday.
bool is_trading_hours(Instant t, const TradingCalendar& cal);

}  // namespace newsalpha
