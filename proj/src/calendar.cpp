#include "newsalpha/calendar.hpp"

#include <boost/date_time/local_time/local_time.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace chr = std::chrono;
namespace blt = boost::local_time;
namespace bpt = boost::posix_time;
namespace bg = boost::gregorian;

namespace {

int parse_int(std::string_view s, std::string_view what) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) {
        throw FormatError("bad " + std::string(what) + " '" + std::string(s) + "'");
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Date make_date(int y, int m, int d, std::string_view text) {
    chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                            chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw FormatError("invalid date '" + std::string(text) + "'");
    return Date{ymd};
}

bg::date to_boost(Date d) {
    chr::year_month_day ymd{d};
    return bg::date(static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day()));
}

bpt::ptime to_ptime(Instant t) {
    auto day = chr::floor<chr::days>(t);
    auto ms = (t - day).count();
    return bpt::ptime(to_boost(Date{day}), bpt::milliseconds(ms));
}

// Reads `[+-]hh[:mm[:ss]]` as seconds; advances `s`.
long parse_posix_hms(std::string_view& s) {
    int sign = 1;
    if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
        sign = s.front() == '-' ? -1 : 1;
        s.remove_prefix(1);
    }
    long total = 0;
    for (int part = 0; part < 3; ++part) {
        std::size_t n = 0;
        while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n]))) ++n;
        if (n == 0) throw ConfigError("bad offset in TZ rule");
        long v = parse_int(s.substr(0, n), "TZ offset");
        s.remove_prefix(n);
        total += v * (part == 0 ? 3600 : part == 1 ? 60 : 1);
        if (s.empty() || s.front() != ':') break;
        s.remove_prefix(1);
    }
    return sign * total;
}

bool parse_posix_name(std::string_view& s) {
    if (s.empty()) return false;
    if (s.front() == '<') {
        auto end = s.find('>');
        if (end == std::string_view::npos) throw ConfigError("unterminated <name> in TZ rule");
        s.remove_prefix(end + 1);
        return true;
    }
    std::size_t n = 0;
    while (n < s.size() && std::isalpha(static_cast<unsigned char>(s[n]))) ++n;
    if (n < 3) return false;
    s.remove_prefix(n);
    return true;
}

std::string hms(long secs) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%02ld:%02ld:%02ld", secs / 3600, (secs / 60) % 60, secs % 60);
    return buf;
}

// `Mm.w.d[/time]` into Boost's spelling of the same rule.
std::string translate_rule(std::string_view r) {
    std::string_view body = r;
    long at = 2 * 3600;
    if (auto slash = r.find('/'); slash != std::string_view::npos) {
        body = r.substr(0, slash);
        std::string_view t = r.substr(slash + 1);
        at = parse_posix_hms(t);
        if (!t.empty() || at < 0 || at >= 24 * 3600) {
            throw ConfigError("unsupported transition time in TZ rule '" + std::string(r) + "'");
        }
    }
    if (body.empty() || body.front() != 'M') {
        throw ConfigError("only Mm.w.d transition rules are supported: '" + std::string(r) + "'");
    }
    return std::string(body) + "/" + hms(at);
}

std::string sign_hms(long secs) {
    return (secs < 0 ? "-" : "+") + hms(secs < 0 ? -secs : secs);
}

// Translates a POSIX TZ string (offset positive west of Greenwich) into
// the Boost dialect (offset positive east, DST given as an adjustment).
blt::time_zone_ptr zone_from_posix(std::string_view rule) {
    std::string_view s = rule;
    if (!parse_posix_name(s)) throw ConfigError("bad TZ rule '" + std::string(rule) + "'");
    long std_west = parse_posix_hms(s);
    long std_east = -std_west;
    std::string out = "STD" + sign_hms(std_east);
    if (!s.empty()) {
        if (!parse_posix_name(s)) throw ConfigError("bad TZ rule '" + std::string(rule) + "'");
        long adjust = 3600;
        if (!s.empty() && s.front() != ',') {
            long dst_east = -parse_posix_hms(s);
            adjust = dst_east - std_east;
        }
        if (s.empty() || s.front() != ',') throw ConfigError("TZ rule lacks DST transitions");
        s.remove_prefix(1);
        auto comma = s.find(',');
        if (comma == std::string_view::npos) throw ConfigError("TZ rule lacks DST end");
        out += "DST" + sign_hms(adjust) + "," + translate_rule(s.substr(0, comma)) + "," +
               translate_rule(s.substr(comma + 1));
    }
    return blt::time_zone_ptr(new blt::posix_time_zone(out));
}

// Last line of a TZif v2+ file holds the POSIX rule for dates past the table.
std::string tzif_footer(const std::string& name) {
    if (name.find("..") != std::string::npos) throw ConfigError("invalid zone name '" + name + "'");
    std::ifstream in("/usr/share/zoneinfo/" + name, std::ios::binary);
    if (!in) throw ConfigError("unknown time zone '" + name + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 5 || bytes.compare(0, 4, "TZif") != 0 || bytes.back() != '\n') {
        throw ConfigError("zone file for '" + name + "' is not TZif v2+");
    }
    auto start = bytes.rfind('\n', bytes.size() - 2);
    if (start == std::string::npos) throw ConfigError("zone file for '" + name + "' has no footer");
    return bytes.substr(start + 1, bytes.size() - start - 2);
}

std::optional<long> parse_fixed_offset(std::string_view s) {
    if (s == "UTC" || s == "Z" || s == "GMT") return 0L;
    if (s.starts_with("UTC")) s.remove_prefix(3);
    if (s.empty() || (s.front() != '+' && s.front() != '-')) return std::nullopt;
    std::string_view rest = s;
    long secs = parse_posix_hms(rest);
    if (!rest.empty()) return std::nullopt;
    return secs;
}

}  // namespace

class TimeZone::Impl {
public:
    explicit Impl(long fixed) : fixed_offset(fixed) {}
    explicit Impl(blt::time_zone_ptr z) : zone(std::move(z)) {}

    long fixed_offset = 0;
    blt::time_zone_ptr zone;
};

TimeZone::TimeZone() : spec_("UTC"), impl_(std::make_shared<Impl>(0L)) {}

TimeZone TimeZone::named(const std::string& spec) {
    TimeZone tz;
    tz.spec_ = spec;
    std::string_view s = trim(spec);
    if (auto fixed = parse_fixed_offset(s)) {
        tz.impl_ = std::make_shared<Impl>(*fixed);
    } else if (s.find('/') != std::string_view::npos) {
        std::string footer = tzif_footer(std::string(s));
        if (footer.empty()) throw ConfigError("zone '" + std::string(s) + "' has an empty rule");
        tz.impl_ = std::make_shared<Impl>(zone_from_posix(footer));
    } else {
        tz.impl_ = std::make_shared<Impl>(zone_from_posix(s));
    }
    return tz;
}

std::chrono::seconds TimeZone::offset_at(Instant t) const {
    if (!impl_->zone) return chr::seconds(impl_->fixed_offset);
    blt::local_date_time ldt(to_ptime(t), impl_->zone);
    auto diff = ldt.local_time() - ldt.utc_time();
    return chr::seconds(diff.total_seconds());
}

Instant TimeZone::to_local(Instant t) const { return t + offset_at(t); }

Instant TimeZone::from_local(Date local_date, std::chrono::seconds time_of_day) const {
    if (!impl_->zone) return Instant{local_date} + time_of_day - chr::seconds(impl_->fixed_offset);
    Instant naive = Instant{local_date} + time_of_day;
    Instant before = naive - offset_at(naive - chr::hours(12));
    Instant after = naive - offset_at(naive + chr::hours(12));
    bool before_ok = to_local(before) == naive;
    bool after_ok = to_local(after) == naive;
    if (before_ok && after_ok) return std::min(before, after);
    if (after_ok) return after;
    // Valid under the earlier offset, or inside a spring-forward gap; the
    // earlier offset pushes a gap time forward by the gap length.
    return before;
}

Instant parse_instant(std::string_view text) {
    std::string_view s = trim(text);
    // YYYY-MM-DDTHH:MM:SS
    if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':') {
        throw FormatError("bad timestamp '" + std::string(text) + "'");
    }
    Date d = make_date(parse_int(s.substr(0, 4), "year"), parse_int(s.substr(5, 2), "month"),
                       parse_int(s.substr(8, 2), "day"), text);
    int hh = parse_int(s.substr(11, 2), "hour");
    int mm = parse_int(s.substr(14, 2), "minute");
    int ss = parse_int(s.substr(17, 2), "second");
    if (hh > 23 || mm > 59 || ss > 60) throw FormatError("bad time in '" + std::string(text) + "'");
    std::size_t pos = 19;
    long ms = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) throw FormatError("bad fraction in '" + std::string(text) + "'");
        std::string frac(s.substr(start, std::min<std::size_t>(3, pos - start)));
        while (frac.size() < 3) frac.push_back('0');
        ms = parse_int(frac, "fraction");
    }
    std::string_view zone = s.substr(pos);
    long offset = 0;
    if (zone == "Z" || zone == "z") {
        offset = 0;
    } else if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
        offset = (parse_int(zone.substr(1, 2), "offset") * 3600 + parse_int(zone.substr(4, 2), "offset") * 60) *
                 (zone[0] == '-' ? -1 : 1);
    } else {
        throw FormatError("bad zone designator in '" + std::string(text) + "'");
    }
    return Instant{d} + chr::hours(hh) + chr::minutes(mm) + chr::seconds(ss) + chr::milliseconds(ms) -
           chr::seconds(offset);
}

std::string format_instant(Instant t) {
    auto day = chr::floor<chr::days>(t);
    chr::year_month_day ymd{day};
    chr::hh_mm_ss<chr::milliseconds> tod{t - day};
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                  static_cast<long long>(tod.seconds().count()), static_cast<long long>(tod.subseconds().count()));
    return buf;
}

Date parse_date(std::string_view text) {
    std::string_view s = trim(text);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw FormatError("bad date '" + std::string(text) + "'");
    return make_date(parse_int(s.substr(0, 4), "year"), parse_int(s.substr(5, 2), "month"),
                     parse_int(s.substr(8, 2), "day"), text);
}

std::string format_date(Date d) {
    chr::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

std::chrono::seconds parse_time_of_day(std::string_view text) {
    std::string_view s = trim(text);
    if (s.size() != 5 && s.size() != 8) throw FormatError("bad time of day '" + std::string(text) + "'");
    if (s[2] != ':' || (s.size() == 8 && s[5] != ':')) throw FormatError("bad time of day '" + std::string(text) + "'");
    int hh = parse_int(s.substr(0, 2), "hour");
    int mm = parse_int(s.substr(3, 2), "minute");
    int ss = s.size() == 8 ? parse_int(s.substr(6, 2), "second") : 0;
    if (hh > 24 || mm > 59 || ss > 59) throw FormatError("bad time of day '" + std::string(text) + "'");
    return chr::hours(hh) + chr::minutes(mm) + chr::seconds(ss);
}

TradingCalendar TradingCalendar::parse(std::istream& in) {
    TradingCalendar cal;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view l = trim(line);
        if (l.empty() || l.front() == '#') continue;
        auto eq = l.find('=');
        if (eq == std::string_view::npos) throw ConfigError("calendar line without '=': " + std::string(l));
        std::string_view key = trim(l.substr(0, eq));
        std::string_view value = trim(l.substr(eq + 1));
        try {
            if (key == "open") {
                cal.open_time = parse_time_of_day(value);
            } else if (key == "close") {
                cal.close_time = parse_time_of_day(value);
            } else if (key == "zone") {
                cal.zone = TimeZone::named(std::string(value));
            } else if (key == "holidays") {
                std::string_view rest = value;
                while (!rest.empty()) {
                    auto comma = rest.find(',');
                    std::string_view item = trim(rest.substr(0, comma));
                    if (!item.empty()) cal.holidays.insert(parse_date(item));
                    if (comma == std::string_view::npos) break;
                    rest.remove_prefix(comma + 1);
                }
            } else {
                throw ConfigError("unknown calendar key '" + std::string(key) + "'");
            }
        } catch (const FormatError& e) {
            throw ConfigError(e.what());
        }
    }
    if (!(cal.open_time < cal.close_time)) throw ConfigError("calendar open must precede close");
    return cal;
}

void TradingCalendar::write(std::ostream& out) const {
    auto tod = [](chr::seconds s) {
        char buf[64];
        auto h = s.count() / 3600, m = (s.count() / 60) % 60, sec = s.count() % 60;
        if (sec) {
            std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(h),
                          static_cast<long long>(m), static_cast<long long>(sec));
        } else {
            std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(h), static_cast<long long>(m));
        }
        return std::string(buf);
    };
    out << "open=" << tod(open_time) << "\nclose=" << tod(close_time) << "\nzone=" << zone.spec() << "\nholidays=";
    bool first = true;
    for (Date d : holidays) {
        out << (first ? "" : ",") << format_date(d);
        first = false;
    }
    out << "\n";
}

Date TradingCalendar::local_date(Instant t) const { return chr::floor<chr::days>(zone.to_local(t)); }

bool TradingCalendar::is_trading_day(Date d) const {
    chr::weekday wd{d};
    if (wd == chr::Saturday || wd == chr::Sunday) return false;
    return !holidays.contains(d);
}

Instant TradingCalendar::open_instant(Date d) const { return zone.from_local(d, open_time); }
Instant TradingCalendar::close_instant(Date d) const { return zone.from_local(d, close_time); }

Date TradingCalendar::next_trading_day(Date d) const {
    Date next = d + chr::days(1);
    for (int guard = 0; !is_trading_day(next); ++guard) {
        if (guard > 3660) throw ConfigError("calendar has no trading day within ten years");
        next += chr::days(1);
    }
    return next;
}

Date TradingCalendar::add_trading_days(Date d, int n) const {
    for (int i = 0; i < n; ++i) d = next_trading_day(d);
    return d;
}

Date TradingCalendar::session_of(Instant t) const {
    Date d = local_date(t);
    if (is_trading_day(d) && close_instant(d) > t) return d;
    return next_trading_day(d);
}

Instant TradingCalendar::next_open_after(Instant t) const {
    Date d = local_date(t);
    if (is_trading_day(d) && open_instant(d) > t) return open_instant(d);
    return open_instant(next_trading_day(d));
}

bool is_trading_hours(Instant t, const TradingCalendar& cal) {
    Instant local = cal.zone.to_local(t);
    Date d = chr::floor<chr::days>(local);
    if (!cal.is_trading_day(d)) return false;
    auto tod = chr::duration_cast<chr::milliseconds>(local - Instant{d});
    return tod >= cal.open_time && tod < cal.close_time;
}

}  // namespace newsalpha
