#include "newsalpha/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "newsalpha/errors.hpp"

namespace newsalpha::csv {

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return false;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (;; c = in_.get()) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw FormatError("unterminated quoted field in record " + std::to_string(index_));
            fields.push_back(std::move(cur));
            break;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    cur.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && cur.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (ch == '\n' || ch == '\r') {
            if (ch == '\r' && in_.peek() == '\n') in_.get();
            fields.push_back(std::move(cur));
            break;
        } else {
            cur.push_back(ch);
        }
    }
    ++index_;
    return true;
}

void Writer::field(std::string_view f, bool first) {
    if (!first) out_ << ',';
    if (f.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << f;
        return;
    }
    out_ << '"';
    for (char ch : f) {
        if (ch == '"') out_ << '"';
        out_ << ch;
    }
    out_ << '"';
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) field(fields[i], i == 0);
    out_ << '\n';
}

void Writer::row(std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (auto f : fields) {
        field(f, first);
        first = false;
    }
    out_ << '\n';
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(std::string_view s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw FormatError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

long long parse_int(std::string_view s) {
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw FormatError("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

unsigned long long parse_uint(std::string_view s) {
    unsigned long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
        throw FormatError("not an unsigned integer: '" + std::string(s) + "'");
    }
    return v;
}

void expect_header(Reader& reader, std::initializer_list<std::string_view> expected) {
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw FormatError("missing CSV header");
    bool ok = fields.size() == expected.size();
    std::size_t i = 0;
    for (auto e : expected) {
        if (!ok) break;
        ok = fields[i++] == e;
    }
    if (!ok) {
        std::string want;
        for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
        throw FormatError("unexpected CSV header, want '" + want + "'");
    }
}

}  // namespace newsalpha::csv
