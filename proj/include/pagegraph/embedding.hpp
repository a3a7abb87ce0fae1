#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pagegraph {

/// A k x d block of token vectors.
///
/// Holds the f32 values as ingested plus a row-normalized f64 copy used by
/// the scoring kernels. Rows whose L2 norm is below 1e-12 or that contain NaN/Inf are
/// rejected at construction.
class MultiVector {
public:
    static constexpr double kMinRowNorm = 1e-12;

    MultiVector() = default;
    MultiVector(std::vector<float> raw, std::size_t rows, std::size_t dim);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<const double> row(std::size_t i) const {
        return {unit_.data() + i * dim_, dim_};
    }
    std::span<const float> raw() const noexcept { return raw_; }

    bool operator==(const MultiVector&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t dim_ = 0;
    std::vector<float> raw_;
    std::vector<double> unit_;
};

struct PageEmbedding {
    int page_id = 0;
    MultiVector vectors;

    std::size_t k() const noexcept { return vectors.rows(); }
    std::size_t d() const noexcept { return vectors.dim(); }

    bool operator==(const PageEmbedding&) const = default;
};

struct QueryEmbedding {
    std::string query_id;
    MultiVector vectors;

    std::size_t k() const noexcept { return vectors.rows(); }
    std::size_t d() const noexcept { return vectors.dim(); }

    bool operator==(const QueryEmbedding&) const = default;
};

/// Pages 0..N-1 of one document, all sharing dimension `dim`. Immutable once
/// loaded; safe to share across threads.
struct EmbeddingStore {
    std::string doc_id;
    std::size_t dim = 0;
    std::vector<PageEmbedding> pages;

    std::size_t size() const noexcept { return pages.size(); }
    const PageEmbedding& page(int page_id) const;

    bool operator==(const EmbeddingStore&) const = default;
};

enum class EmbeddingFormat { Binary, Json, Auto };

// ---------------------------------------------------------------------------
// On-disk formats.
//
// Binary "MVE1": magic 'M' 'V' 'E' '1', u32 LE N, u32 LE d, then per entry
// u32 LE k followed by k*d f32 LE values row-major.
// JSON: {"doc_id": str, "d": int, "pages": [{"page_id": int, "vectors": [[...]]}]}.
// Query files use the same layouts; JSON entries carry "query_id" instead of
// "page_id", binary entries are named by their index.
// ---------------------------------------------------------------------------

EmbeddingStore decode_store_binary(std::string_view bytes, std::string doc_id);
std::string encode_store_binary(const EmbeddingStore& store);
EmbeddingStore decode_store_json(std::string_view text);
std::string encode_store_json(const EmbeddingStore& store);

EmbeddingStore load_store(const std::filesystem::path& path,
                          EmbeddingFormat format = EmbeddingFormat::Auto);
void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                EmbeddingFormat format);

std::vector<QueryEmbedding> decode_queries_binary(std::string_view bytes);
std::string encode_queries_binary(std::span<const QueryEmbedding> queries);
std::vector<QueryEmbedding> decode_queries_json(std::string_view text);
std::string encode_queries_json(std::span<const QueryEmbedding> queries, std::size_t dim);

std::vector<QueryEmbedding> load_queries(const std::filesystem::path& path,
                                         EmbeddingFormat format = EmbeddingFormat::Auto);
void save_queries(std::span<const QueryEmbedding> queries, std::size_t dim,
                  const std::filesystem::path& path, EmbeddingFormat format);

// ---------------------------------------------------------------------------
// Similarity kernels. All inputs are unit-row, so every result lies in [-1, 1].
// ---------------------------------------------------------------------------

/// Late-interaction score: mean over rows of `from` of the best dot product
/// against any row of `to`. Not symmetric.
double maxsim(const MultiVector& from, const MultiVector& to);

/// Semantic relevance of a page to a query (query-token mean of MaxSim).
double query_page_score(const QueryEmbedding& query, const PageEmbedding& page);

/// Symmetrized MaxSim between two pages. Bitwise symmetric in its arguments.
double page_page_similarity(const PageEmbedding& a, const PageEmbedding& b);

}  // namespace pagegraph
