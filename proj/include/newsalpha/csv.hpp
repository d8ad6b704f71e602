#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace newsalpha::csv {

/// RFC-4180 record reader: quoted fields, doubled quotes, CRLF and embedded
/// newlines inside quotes.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Returns false at end of stream. Throws FormatError on an unterminated quote.
    bool next(std::vector<std::string>& fields);
    /// 0-based index of the record most recently returned by next().
    std::size_t record_index() const noexcept { return index_ - 1; }

private:
    std::istream& in_;
    std::size_t index_ = 0;
};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);
    void row(std::initializer_list<std::string_view> fields);

private:
    void field(std::string_view f, bool first);
    std::ostream& out_;
};

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);
unsigned long long parse_uint(std::string_view s);

/// Reads the header row and checks it equals `expected`.
void expect_header(Reader& reader, std::initializer_list<std::string_view> expected);

}  // namespace newsalpha::csv
