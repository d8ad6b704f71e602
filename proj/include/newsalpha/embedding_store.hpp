#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace newsalpha {

/// Token -> vector lookup with a fixed dimension.
class StaticTable {
public:
    explicit StaticTable(std::size_t dimension = 0) : dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return order_.size(); }

    /// Throws FormatError on a duplicate token and ShapeError on a length mismatch.
    void add(std::string token, std::vector<float> vec);
    /// nullptr if the token is not in the table.
    const std::vector<float>* find(const std::string& token) const;
    /// Tokens in insertion order.
    const std::vector<std::string>& tokens() const noexcept { return order_; }

private:
    std::size_t dimension_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, std::vector<float>> entries_;
};

/// Text format: a `count dimension` header line, then `token v1 ... v_dim` per line.
StaticTable load_static_table(std::istream& in);
void write_static_table(std::ostream& out, const StaticTable& table);

enum class EmbeddingSource : std::uint8_t { Static = 0, Base = 1, Tuned = 2 };

std::string to_string(EmbeddingSource s);
EmbeddingSource embedding_source_from_string(std::string_view s);

/// One headline as a (tokens x dimension) row-major matrix.
struct HeadlineEmbedding {
    std::uint64_t news_id = 0;
    EmbeddingSource source = EmbeddingSource::Static;
    std::uint16_t layer = 0;
    std::uint16_t rows = 0;
    std::uint16_t cols = 0;
    std::vector<float> values;

    float at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    bool operator==(const HeadlineEmbedding&) const = default;
};

/// Throws ShapeError when the matrix or its source/layer tag is inconsistent.
void validate_embedding(const HeadlineEmbedding& e);

enum class OovPolicy { Zero, Skip };

/// Row i is the table vector of token i. Out-of-vocabulary tokens become zero
/// rows (or are dropped under OovPolicy::Skip). Throws EmptyHeadline when no
/// row would remain.
HeadlineEmbedding embed_static(std::span<const std::string> tokens, const StaticTable& table,
                               OovPolicy oov = OovPolicy::Zero, std::uint64_t news_id = 0);

/// Binary layout, little-endian:
///   "EMB1" | u8 source | u16 layer | u32 count |
///   count x ( u64 news_id | u16 rows | u16 cols | rows*cols f32, row-major )
/// Every record must carry the file's source and layer. An empty list is
/// written with the given tag.
struct EmbeddingFileHeader {
    EmbeddingSource source = EmbeddingSource::Static;
    std::uint16_t layer = 0;
    std::uint32_t count = 0;
};

constexpr std::size_t kEmbeddingHeaderBytes = 11;

/// Returns the byte offset of every record, in order.
std::vector<std::uint64_t> write_embeddings(std::span<const HeadlineEmbedding> items, std::ostream& out,
                                            EmbeddingSource empty_source = EmbeddingSource::Static,
                                            std::uint16_t empty_layer = 0);
EmbeddingFileHeader read_embedding_header(std::istream& in);
std::vector<HeadlineEmbedding> read_embeddings(std::istream& in);
/// Reads one record at `offset` (as recorded in the index sidecar).
HeadlineEmbedding read_embedding_at(std::istream& in, std::uint64_t offset);

/// Sidecar CSV `news_id,offset`.
void write_embedding_index(std::ostream& out, std::span<const HeadlineEmbedding> items,
                           std::span<const std::uint64_t> offsets);
std::unordered_map<std::uint64_t, std::uint64_t> read_embedding_index(std::istream& in);

}  // namespace newsalpha
