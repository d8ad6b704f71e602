#include "newsalpha/corpus.hpp"

#include <algorithm>
#include <istream>
#include <locale>
#include <json.hpp>
#include <ostream>

#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace {

constexpr std::string_view kNewsFields[] = {"id", "timestamp", "ticker", "headline", "vendor_score",
                                            "vendor_confidence"};

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::optional<int> optional_int(std::string_view s, std::size_t row, const char* field) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    try {
        return static_cast<int>(csv::parse_int(s));
    } catch (const FormatError&) {
        throw RowError(row, field, "not an integer: '" + std::string(s) + "'");
    }
}

NewsItem news_from_fields(const std::vector<std::string>& f, std::size_t row) {
    if (f.size() != std::size(kNewsFields)) {
        throw RowError(row, "*", "expected 6 fields, found " + std::to_string(f.size()));
    }
    NewsItem item;
    try {
        item.id = csv::parse_uint(trim(f[0]));
    } catch (const FormatError&) {
        throw RowError(row, "id", "not an unsigned 64-bit integer: '" + f[0] + "'");
    }
    try {
        item.timestamp = parse_instant(f[1]);
    } catch (const FormatError& e) {
        throw RowError(row, "timestamp", e.what());
    }
    item.ticker = std::string(trim(f[2]));
    item.headline = f[3];
    item.vendor_score = optional_int(f[4], row, "vendor_score");
    item.vendor_confidence = optional_int(f[5], row, "vendor_confidence");
    return item;
}

std::string json_scalar_text(const nlohmann::json& v, std::size_t row, const char* field) {
    if (v.is_null()) return {};
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    throw RowError(row, field, "unexpected JSON type");
}

NewsItem news_from_json(std::string_view line, std::size_t row) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw RowError(row, "*", std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw RowError(row, "*", "record is not a JSON object");
    std::vector<std::string> fields;
    for (auto name : kNewsFields) {
        std::string key(name);
        auto it = obj.find(key);
        bool optional = name == "vendor_score" || name == "vendor_confidence";
        if (it == obj.end()) {
            if (!optional) throw RowError(row, key, "missing");
            fields.emplace_back();
            continue;
        }
        fields.push_back(json_scalar_text(*it, row, name.data()));
    }
    return news_from_fields(fields, row);
}

template <class OnItem, class OnError>
void parse_news_impl(std::istream& in, NewsFormat format, OnItem on_item, OnError on_error) {
    if (!in.good() && !in.eof()) throw IngestError("news stream is not readable");
    auto handle = [&](auto&& make, std::size_t row) {
        try {
            NewsItem item = make();
            validate_news_item(item, row);
            on_item(std::move(item));
        } catch (const RowError& e) {
            on_error(e);
        }
    };
    if (format == NewsFormat::Csv) {
        csv::Reader reader(in);
        std::vector<std::string> fields;
        try {
            if (!reader.next(fields)) return;
            if (fields.size() != std::size(kNewsFields) ||
                !std::equal(fields.begin(), fields.end(), std::begin(kNewsFields))) {
                throw IngestError("news CSV header must be id,timestamp,ticker,headline,vendor_score,vendor_confidence");
            }
            std::size_t row = 0;
            while (reader.next(fields)) {
                if (fields.size() == 1 && blank(fields[0])) continue;
                handle([&] { return news_from_fields(fields, row); }, row);
                ++row;
            }
        } catch (const FormatError& e) {
            throw IngestError(e.what());
        }
    } else {
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            if (blank(line)) continue;
            handle([&] { return news_from_json(line, row); }, row);
            ++row;
        }
    }
    if (in.bad()) throw IngestError("read failure on news stream");
}

const std::ctype<wchar_t>* utf8_ctype() {
    static const std::ctype<wchar_t>* facet = []() -> const std::ctype<wchar_t>* {
        try {
            static const std::locale loc("C.UTF-8");
            return &std::use_facet<std::ctype<wchar_t>>(loc);
        } catch (const std::runtime_error&) {
            return nullptr;
        }
    }();
    return facet;
}

// Decodes one code point; malformed sequences yield U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
        ++i;
        return 0xFFFD;
    }
    char32_t cp = len == 1 ? b0 : b0 & (0x7F >> len);
    for (int k = 1; k < len; ++k) {
        auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_space(char32_t cp, const std::ctype<wchar_t>* ct) {
    if (cp == 0xA0 || cp == 0x2007 || cp == 0x202F || cp == 0xFEFF) return true;
    if (cp < 0x80) return std::isspace(static_cast<int>(cp)) != 0;
    return ct && ct->is(std::ctype_base::space, static_cast<wchar_t>(cp));
}

bool is_punct(char32_t cp, const std::ctype<wchar_t>* ct) {
    if (cp == 0xFFFD) return true;
    if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
    return ct && ct->is(std::ctype_base::punct, static_cast<wchar_t>(cp));
}

char32_t to_lower(char32_t cp, const std::ctype<wchar_t>* ct) {
    if (cp < 0x80) return static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    return ct ? static_cast<char32_t>(ct->tolower(static_cast<wchar_t>(cp))) : cp;
}

}  // namespace

NewsFormat news_format_from_tag(std::string_view tag) {
    if (tag == "csv") return NewsFormat::Csv;
    if (tag == "jsonl" || tag == "json-lines" || tag == "jsonlines") return NewsFormat::JsonLines;
    throw ConfigError("unknown news format '" + std::string(tag) + "'");
}

void validate_news_item(const NewsItem& item, std::size_t row) {
    if (blank(item.headline)) throw RowError(row, "headline", "empty after trimming");
    if (blank(item.ticker)) throw RowError(row, "ticker", "empty");
    if (item.vendor_score.has_value() != item.vendor_confidence.has_value()) {
        throw RowError(row, item.vendor_score ? "vendor_confidence" : "vendor_score",
                       "vendor_score and vendor_confidence must be given together");
    }
    if (item.vendor_score && (*item.vendor_score < -1 || *item.vendor_score > 1)) {
        throw RowError(row, "vendor_score", "must be -1, 0 or 1");
    }
    if (item.vendor_confidence && (*item.vendor_confidence < 0 || *item.vendor_confidence > 100)) {
        throw RowError(row, "vendor_confidence", "must be within [0, 100]");
    }
}

std::vector<NewsItem> parse_news(std::istream& in, NewsFormat format) {
    std::vector<NewsItem> items;
    parse_news_impl(
        in, format, [&](NewsItem&& item) { items.push_back(std::move(item)); },
        [](const RowError& e) { throw e; });
    return items;
}

NewsParseResult parse_news_lenient(std::istream& in, NewsFormat format) {
    NewsParseResult result;
    parse_news_impl(
        in, format, [&](NewsItem&& item) { result.items.push_back(std::move(item)); },
        [&](const RowError& e) { result.rejected.push_back({e.row(), e.field(), e.what()}); });
    return result;
}

void write_news(std::ostream& out, const std::vector<NewsItem>& items, NewsFormat format) {
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    if (format == NewsFormat::Csv) {
        csv::Writer w(out);
        w.row({"id", "timestamp", "ticker", "headline", "vendor_score", "vendor_confidence"});
        for (const auto& item : items) {
            w.row({std::to_string(item.id), format_instant(item.timestamp), item.ticker, item.headline,
                   opt(item.vendor_score), opt(item.vendor_confidence)});
        }
        return;
    }
    for (const auto& item : items) {
        nlohmann::ordered_json j;
        j["id"] = item.id;
        j["timestamp"] = format_instant(item.timestamp);
        j["ticker"] = item.ticker;
        j["headline"] = item.headline;
        j["vendor_score"] = item.vendor_score ? nlohmann::ordered_json(*item.vendor_score) : nullptr;
        j["vendor_confidence"] = item.vendor_confidence ? nlohmann::ordered_json(*item.vendor_confidence) : nullptr;
        out << j.dump() << '\n';
    }
}

std::vector<std::string> tokenize(std::string_view headline) {
    const auto* ct = utf8_ctype();
    std::vector<std::string> tokens;
    std::string cur;
    for (std::size_t i = 0; i < headline.size();) {
        char32_t cp = next_code_point(headline, i);
        if (is_space(cp, ct)) {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else if (!is_punct(cp, ct)) {
            append_utf8(cur, to_lower(cp, ct));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

std::optional<double> PriceSeries::close_on(Date d) const {
    auto it = std::lower_bound(daily_closes.begin(), daily_closes.end(), d,
                               [](const auto& p, Date key) { return p.first < key; });
    if (it == daily_closes.end() || it->first != d) return std::nullopt;
    return it->second;
}

void validate_price_series(const PriceSeries& s) {
    for (std::size_t i = 0; i < s.daily_closes.size(); ++i) {
        if (!(s.daily_closes[i].second > 0)) throw FormatError(s.instrument + ": non-positive daily close");
        if (i && !(s.daily_closes[i - 1].first < s.daily_closes[i].first)) {
            throw FormatError(s.instrument + ": daily closes not strictly increasing at " +
                              format_date(s.daily_closes[i].first));
        }
    }
    for (std::size_t i = 0; i < s.minute_bars.size(); ++i) {
        if (!(s.minute_bars[i].price > 0)) throw FormatError(s.instrument + ": non-positive minute price");
        if (i && !(s.minute_bars[i - 1].time < s.minute_bars[i].time)) {
            throw FormatError(s.instrument + ": minute bars not strictly increasing at " +
                              format_instant(s.minute_bars[i].time));
        }
    }
}

namespace {

template <class Add>
void read_price_rows(std::istream& in, Add add) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"instrument", "timestamp", "price"});
    std::vector<std::string> f;
    std::size_t row = 0;
    while (reader.next(f)) {
        if (f.size() == 1 && blank(f[0])) continue;
        if (f.size() != 3) throw RowError(row, "*", "expected 3 fields");
        double price = 0;
        try {
            price = csv::parse_double(trim(f[2]));
        } catch (const FormatError& e) {
            throw RowError(row, "price", e.what());
        }
        try {
            add(std::string(trim(f[0])), trim(f[1]), price);
        } catch (const FormatError& e) {
            throw RowError(row, "timestamp", e.what());
        }
        ++row;
    }
}

}  // namespace

void read_daily_prices(std::istream& in, PriceBook& book) {
    read_price_rows(in, [&](std::string inst, std::string_view ts, double price) {
        Date d = ts.size() == 10 ? parse_date(ts) : std::chrono::floor<std::chrono::days>(parse_instant(ts));
        auto& s = book[inst];
        s.instrument = inst;
        s.daily_closes.emplace_back(d, price);
    });
    for (auto& [name, s] : book) validate_price_series(s);
}

void read_minute_prices(std::istream& in, PriceBook& book) {
    read_price_rows(in, [&](std::string inst, std::string_view ts, double price) {
        auto& s = book[inst];
        s.instrument = inst;
        s.minute_bars.push_back({parse_instant(ts), price});
    });
    for (auto& [name, s] : book) validate_price_series(s);
}

void write_daily_prices(std::ostream& out, const PriceBook& book) {
    csv::Writer w(out);
    w.row({"instrument", "timestamp", "price"});
    for (const auto& [name, s] : book) {
        for (const auto& [d, p] : s.daily_closes) w.row({name, format_date(d), csv::format_double(p)});
    }
}

void write_minute_prices(std::ostream& out, const PriceBook& book) {
    csv::Writer w(out);
    w.row({"instrument", "timestamp", "price"});
    for (const auto& [name, s] : book) {
        for (const auto& bar : s.minute_bars) w.row({name, format_instant(bar.time), csv::format_double(bar.price)});
    }
}

}  // namespace newsalpha
