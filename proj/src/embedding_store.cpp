#include "newsalpha/embedding_store.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "binary_io.hpp"
#include "newsalpha/csv.hpp"
#include "newsalpha/errors.hpp"

namespace newsalpha {

namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};

using detail::get_le;
using detail::put_le;

void check_tag(EmbeddingSource source, std::uint16_t layer) {
    if (source == EmbeddingSource::Static && layer != 0) throw ShapeError("static embeddings must carry layer 0");
    if (source != EmbeddingSource::Static && layer == 0) throw ShapeError("contextual embeddings need a layer >= 1");
}

HeadlineEmbedding read_record(std::istream& in, const EmbeddingFileHeader& h) {
    HeadlineEmbedding e;
    e.source = h.source;
    e.layer = h.layer;
    e.news_id = get_le<std::uint64_t>(in, "news_id");
    e.rows = get_le<std::uint16_t>(in, "rows");
    e.cols = get_le<std::uint16_t>(in, "cols");
    if (e.rows == 0 || e.cols == 0) throw ShapeError("record for news " + std::to_string(e.news_id) + " is empty");
    std::size_t n = static_cast<std::size_t>(e.rows) * e.cols;
    std::vector<unsigned char> bytes(n * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw Truncated("matrix payload of news " + std::to_string(e.news_id));
    }
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) | static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8 |
                             static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16 |
                             static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24;
        e.values[i] = std::bit_cast<float>(bits);
    }
    return e;
}

}  // namespace

void StaticTable::add(std::string token, std::vector<float> vec) {
    if (vec.size() != dimension_) {
        throw ShapeError("token '" + token + "' has " + std::to_string(vec.size()) + " values, table dimension is " +
                         std::to_string(dimension_));
    }
    if (entries_.contains(token)) throw FormatError("duplicate token '" + token + "'");
    order_.push_back(token);
    entries_.emplace(std::move(token), std::move(vec));
}

const std::vector<float>* StaticTable::find(const std::string& token) const {
    auto it = entries_.find(token);
    return it == entries_.end() ? nullptr : &it->second;
}

StaticTable load_static_table(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("static table is missing its header");
    std::istringstream header(line);
    long long count = -1, dim = -1;
    if (!(header >> count >> dim) || count < 0 || dim <= 0) {
        throw FormatError("static table header must be 'count dimension'");
    }
    StaticTable table(static_cast<std::size_t>(dim));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::string token;
        row >> token;
        std::vector<float> vec;
        std::string num;
        while (row >> num) {
            float v = 0;
            auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
            if (ec != std::errc() || p != num.data() + num.size()) {
                throw FormatError("line " + std::to_string(lineno) + ": bad number '" + num + "'");
            }
            vec.push_back(v);
        }
        table.add(std::move(token), std::move(vec));
    }
    if (table.size() != static_cast<std::size_t>(count)) {
        throw FormatError("static table header declares " + std::to_string(count) + " tokens, found " +
                          std::to_string(table.size()));
    }
    return table;
}

void write_static_table(std::ostream& out, const StaticTable& table) {
    out << table.size() << ' ' << table.dimension() << '\n';
    char buf[32];
    for (const auto& token : table.tokens()) {
        out << token;
        for (float v : *table.find(token)) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
            out << ' ' << std::string_view(buf, p - buf);
        }
        out << '\n';
    }
}

std::string to_string(EmbeddingSource s) {
    switch (s) {
        case EmbeddingSource::Static: return "static";
        case EmbeddingSource::Base: return "base";
        case EmbeddingSource::Tuned: return "tuned";
    }
    return "?";
}

EmbeddingSource embedding_source_from_string(std::string_view s) {
    if (s == "static") return EmbeddingSource::Static;
    if (s == "base") return EmbeddingSource::Base;
    if (s == "tuned") return EmbeddingSource::Tuned;
    throw ConfigError("unknown embedding source '" + std::string(s) + "'");
}

void validate_embedding(const HeadlineEmbedding& e) {
    check_tag(e.source, e.layer);
    if (e.rows == 0 || e.cols == 0) throw ShapeError("embedding of news " + std::to_string(e.news_id) + " is empty");
    if (e.values.size() != static_cast<std::size_t>(e.rows) * e.cols) {
        throw ShapeError("embedding of news " + std::to_string(e.news_id) + " has a values/shape mismatch");
    }
}

HeadlineEmbedding embed_static(std::span<const std::string> tokens, const StaticTable& table, OovPolicy oov,
                               std::uint64_t news_id) {
    if (tokens.empty()) throw EmptyHeadline("no tokens for news " + std::to_string(news_id));
    if (table.dimension() == 0 || table.dimension() > 0xFFFF) throw ShapeError("unusable static table dimension");
    HeadlineEmbedding e;
    e.news_id = news_id;
    e.cols = static_cast<std::uint16_t>(table.dimension());
    std::size_t rows = 0;
    for (const auto& t : tokens) {
        const auto* vec = table.find(t);
        if (vec) {
            e.values.insert(e.values.end(), vec->begin(), vec->end());
        } else if (oov == OovPolicy::Zero) {
            e.values.insert(e.values.end(), table.dimension(), 0.0f);
        } else {
            continue;
        }
        ++rows;
    }
    if (rows == 0) throw EmptyHeadline("every token of news " + std::to_string(news_id) + " is out of vocabulary");
    if (rows > 0xFFFF) throw ShapeError("headline too long for the embedding format");
    e.rows = static_cast<std::uint16_t>(rows);
    return e;
}

std::vector<std::uint64_t> write_embeddings(std::span<const HeadlineEmbedding> items, std::ostream& out,
                                            EmbeddingSource empty_source, std::uint16_t empty_layer) {
    EmbeddingSource source = items.empty() ? empty_source : items.front().source;
    std::uint16_t layer = items.empty() ? empty_layer : items.front().layer;
    check_tag(source, layer);
    if (items.size() > 0xFFFFFFFFu) throw ShapeError("too many records for one embedding file");
    for (const auto& e : items) {
        validate_embedding(e);
        if (e.source != source || e.layer != layer) throw ShapeError("records in one file must share source and layer");
    }
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(source));
    put_le<std::uint16_t>(out, layer);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(items.size()));
    std::vector<std::uint64_t> offsets;
    offsets.reserve(items.size());
    std::uint64_t pos = kEmbeddingHeaderBytes;
    std::vector<char> buf;
    for (const auto& e : items) {
        offsets.push_back(pos);
        put_le<std::uint64_t>(out, e.news_id);
        put_le<std::uint16_t>(out, e.rows);
        put_le<std::uint16_t>(out, e.cols);
        buf.resize(e.values.size() * 4);
        for (std::size_t i = 0; i < e.values.size(); ++i) {
            auto bits = std::bit_cast<std::uint32_t>(e.values[i]);
            for (int b = 0; b < 4; ++b) buf[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        pos += 12 + buf.size();
    }
    if (!out) throw FormatError("write failure on embedding sink");
    return offsets;
}

EmbeddingFileHeader read_embedding_header(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != 4) throw Truncated("embedding file shorter than its magic");
    if (magic != kMagic) throw BadMagic("expected \"EMB1\"");
    EmbeddingFileHeader h;
    auto tag = get_le<std::uint8_t>(in, "source tag");
    if (tag > 2) throw ShapeError("unknown source tag " + std::to_string(tag));
    h.source = static_cast<EmbeddingSource>(tag);
    h.layer = get_le<std::uint16_t>(in, "layer");
    check_tag(h.source, h.layer);
    h.count = get_le<std::uint32_t>(in, "record count");
    return h;
}

std::vector<HeadlineEmbedding> read_embeddings(std::istream& in) {
    EmbeddingFileHeader h = read_embedding_header(in);
    std::vector<HeadlineEmbedding> items;
    items.reserve(h.count);
    for (std::uint32_t i = 0; i < h.count; ++i) {
        items.push_back(read_record(in, h));
        if (items.back().cols != items.front().cols) {
            throw ShapeError("record " + std::to_string(i) + " has a different column count");
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw ShapeError("bytes remain after the " + std::to_string(h.count) + " declared records");
    }
    return items;
}

HeadlineEmbedding read_embedding_at(std::istream& in, std::uint64_t offset) {
    in.clear();
    in.seekg(0);
    EmbeddingFileHeader h = read_embedding_header(in);
    if (offset < kEmbeddingHeaderBytes) throw FormatError("offset points into the file header");
    in.seekg(static_cast<std::streamoff>(offset));
    if (!in) throw Truncated("offset beyond end of file");
    return read_record(in, h);
}

void write_embedding_index(std::ostream& out, std::span<const HeadlineEmbedding> items,
                           std::span<const std::uint64_t> offsets) {
    if (items.size() != offsets.size()) throw ShapeError("index needs one offset per record");
    csv::Writer w(out);
    w.row({"news_id", "offset"});
    for (std::size_t i = 0; i < items.size(); ++i) {
        w.row({std::to_string(items[i].news_id), std::to_string(offsets[i])});
    }
}

std::unordered_map<std::uint64_t, std::uint64_t> read_embedding_index(std::istream& in) {
    csv::Reader reader(in);
    csv::expect_header(reader, {"news_id", "offset"});
    std::unordered_map<std::uint64_t, std::uint64_t> index;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 2) throw FormatError("index rows need two fields");
        index[csv::parse_uint(f[0])] = csv::parse_uint(f[1]);
    }
    return index;
}

}  // namespace newsalpha
