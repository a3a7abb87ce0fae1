#include "pagegraph/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "pagegraph/error.hpp"
#include "pagegraph/io.hpp"

namespace pagegraph {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'E', '1'};

template <typename T>
T byteswap_if_big(T value) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        std::reverse(bytes, bytes + sizeof(T));
        std::memcpy(&value, bytes, sizeof(T));
    }
    return value;
}

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T read() {
        if (remaining() < sizeof(T)) {
            throw Error(ErrorCode::MalformedFile, "truncated MVE1 payload");
        }
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return byteswap_if_big(value);
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

template <typename T>
void append_le(std::string& out, T value) {
    value = byteswap_if_big(value);
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.append(bytes, sizeof(T));
}

struct RawEntry {
    std::size_t rows = 0;
    std::vector<float> values;
};

std::vector<RawEntry> decode_mve1(std::string_view bytes, std::size_t& dim_out) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(ErrorCode::MalformedFile, "bad magic, expected MVE1");
    }
    ByteReader reader(bytes.substr(4));
    const auto n = reader.read<std::uint32_t>();
    const auto dim = reader.read<std::uint32_t>();
    if (n == 0 || dim == 0) {
        throw Error(ErrorCode::MalformedFile, "MVE1 header must have N >= 1 and d >= 1");
    }
    std::vector<RawEntry> entries;
    entries.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto k = reader.read<std::uint32_t>();
        if (k == 0) {
            throw Error(ErrorCode::MalformedFile, "entry " + std::to_string(i) + " has k = 0");
        }
        const std::uint64_t count = std::uint64_t{k} * dim;
        if (count > reader.remaining() / sizeof(float)) {
            throw Error(ErrorCode::MalformedFile, "truncated MVE1 payload");
        }
        RawEntry entry;
        entry.rows = k;
        entry.values.resize(count);
        for (auto& v : entry.values) {
            v = reader.read<float>();
        }
        entries.push_back(std::move(entry));
    }
    if (reader.remaining() != 0) {
        throw Error(ErrorCode::MalformedFile, "trailing bytes after MVE1 payload");
    }
    dim_out = dim;
    return entries;
}

std::string encode_mve1(std::size_t dim, std::span<const MultiVector* const> entries) {
    std::string out(kMagic, 4);
    append_le(out, static_cast<std::uint32_t>(entries.size()));
    append_le(out, static_cast<std::uint32_t>(dim));
    for (const MultiVector* mv : entries) {
        append_le(out, static_cast<std::uint32_t>(mv->rows()));
        for (float v : mv->raw()) {
            append_le(out, v);
        }
    }
    return out;
}

MultiVector vectors_from_json(const nlohmann::json& rows, std::size_t dim, const std::string& what) {
    if (!rows.is_array() || rows.empty()) {
        throw Error(ErrorCode::MalformedFile, what + ": \"vectors\" must be a non-empty array");
    }
    std::vector<float> raw;
    raw.reserve(rows.size() * dim);
    for (const auto& row : rows) {
        if (!row.is_array()) {
            throw Error(ErrorCode::MalformedFile, what + ": vector row is not an array");
        }
        if (row.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        what + ": row has " + std::to_string(row.size()) + " values, expected " +
                            std::to_string(dim));
        }
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw Error(ErrorCode::MalformedFile, what + ": non-numeric vector value");
            }
            const double x = v.get<double>();
            if (!std::isfinite(x) || std::abs(x) > std::numeric_limits<float>::max()) {
                throw Error(ErrorCode::MalformedFile, what + ": value not representable as f32");
            }
            raw.push_back(static_cast<float>(x));
        }
    }
    return MultiVector(std::move(raw), rows.size(), dim);
}

nlohmann::ordered_json vectors_to_json(const MultiVector& mv) {
    auto rows = nlohmann::ordered_json::array();
    const auto raw = mv.raw();
    for (std::size_t r = 0; r < mv.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < mv.dim(); ++c) {
            row.push_back(static_cast<double>(raw[r * mv.dim() + c]));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json parse_json(std::string_view text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedFile, e.what());
    }
}

std::size_t json_dim(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("d") || !doc["d"].is_number_integer() ||
        doc["d"].get<long long>() < 1) {
        throw Error(ErrorCode::MalformedFile, "missing or invalid \"d\"");
    }
    if (!doc.contains("pages") || !doc["pages"].is_array() || doc["pages"].empty()) {
        throw Error(ErrorCode::MalformedFile, "missing or empty \"pages\"");
    }
    return doc["d"].get<std::size_t>();
}

EmbeddingFormat sniff(std::string_view bytes, EmbeddingFormat requested) {
    if (requested != EmbeddingFormat::Auto) {
        return requested;
    }
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
        return EmbeddingFormat::Binary;
    }
    return EmbeddingFormat::Json;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

}  // namespace

MultiVector::MultiVector(std::vector<float> raw, std::size_t rows, std::size_t dim)
    : rows_(rows), dim_(dim), raw_(std::move(raw)) {
    if (rows_ == 0 || dim_ == 0) {
        throw Error(ErrorCode::MalformedFile, "multi-vector needs k >= 1 and d >= 1");
    }
    if (raw_.size() != rows_ * dim_) {
        throw Error(ErrorCode::DimensionMismatch, "value count does not equal k * d");
    }
    unit_.resize(raw_.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < dim_; ++c) {
            const double x = raw_[r * dim_ + c];
            if (!std::isfinite(x)) {
                throw Error(ErrorCode::MalformedFile, "non-finite value in row " + std::to_string(r));
            }
            sq += x * x;
        }
        const double norm = std::sqrt(sq);
        if (!(norm >= kMinRowNorm) || !std::isfinite(norm)) {
            throw Error(ErrorCode::DegenerateVector, "row " + std::to_string(r) + " has near-zero norm");
        }
        for (std::size_t c = 0; c < dim_; ++c) {
            unit_[r * dim_ + c] = raw_[r * dim_ + c] / norm;
        }
    }
}

const PageEmbedding& EmbeddingStore::page(int page_id) const {
    if (page_id < 0 || static_cast<std::size_t>(page_id) >= pages.size()) {
        throw Error(ErrorCode::PageOutOfRange, "page " + std::to_string(page_id));
    }
    return pages[static_cast<std::size_t>(page_id)];
}

EmbeddingStore decode_store_binary(std::string_view bytes, std::string doc_id) {
    std::size_t dim = 0;
    auto entries = decode_mve1(bytes, dim);
    EmbeddingStore store{std::move(doc_id), dim, {}};
    store.pages.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        store.pages.push_back(
            {static_cast<int>(i), MultiVector(std::move(entries[i].values), entries[i].rows, dim)});
    }
    return store;
}

std::string encode_store_binary(const EmbeddingStore& store) {
    std::vector<const MultiVector*> entries;
    for (const auto& p : store.pages) {
        entries.push_back(&p.vectors);
    }
    return encode_mve1(store.dim, entries);
}

EmbeddingStore decode_store_json(std::string_view text) {
    const auto doc = parse_json(text);
    const std::size_t dim = json_dim(doc);
    EmbeddingStore store;
    store.doc_id = doc.value("doc_id", std::string{});
    store.dim = dim;
    const auto& pages = doc["pages"];
    std::vector<const nlohmann::json*> slots(pages.size(), nullptr);
    for (const auto& page : pages) {
        if (!page.is_object() || !page.contains("page_id") || !page["page_id"].is_number_integer()) {
            throw Error(ErrorCode::MalformedFile, "page entry without integer \"page_id\"");
        }
        const auto id = page["page_id"].get<long long>();
        if (id < 0 || static_cast<std::size_t>(id) >= slots.size() || slots[id] != nullptr) {
            throw Error(ErrorCode::MalformedFile,
                        "page ids must be exactly 0..N-1, got " + std::to_string(id));
        }
        slots[id] = &page;
    }
    store.pages.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto what = "page " + std::to_string(i);
        store.pages.push_back(
            {static_cast<int>(i), vectors_from_json((*slots[i]).value("vectors", nlohmann::json{}), dim, what)});
    }
    return store;
}

std::string encode_store_json(const EmbeddingStore& store) {
    nlohmann::ordered_json doc;
    doc["doc_id"] = store.doc_id;
    doc["d"] = store.dim;
    auto pages = nlohmann::ordered_json::array();
    for (const auto& p : store.pages) {
        nlohmann::ordered_json entry;
        entry["page_id"] = p.page_id;
        entry["vectors"] = vectors_to_json(p.vectors);
        pages.push_back(std::move(entry));
    }
    doc["pages"] = std::move(pages);
    return doc.dump() + "\n";
}

EmbeddingStore load_store(const std::filesystem::path& path, EmbeddingFormat format) {
    const auto bytes = io::read_file(path);
    if (sniff(bytes, format) == EmbeddingFormat::Binary) {
        return decode_store_binary(bytes, path.stem().string());
    }
    return decode_store_json(bytes);
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path,
                EmbeddingFormat format) {
    io::write_file_atomic(path, format == EmbeddingFormat::Json ? encode_store_json(store)
                                                                : encode_store_binary(store));
}

std::vector<QueryEmbedding> decode_queries_binary(std::string_view bytes) {
    std::size_t dim = 0;
    auto entries = decode_mve1(bytes, dim);
    std::vector<QueryEmbedding> queries;
    queries.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        queries.push_back(
            {std::to_string(i), MultiVector(std::move(entries[i].values), entries[i].rows, dim)});
    }
    return queries;
}

std::string encode_queries_binary(std::span<const QueryEmbedding> queries) {
    if (queries.empty()) {
        throw Error(ErrorCode::ValidationError, "no queries to encode");
    }
    std::vector<const MultiVector*> entries;
    for (const auto& q : queries) {
        entries.push_back(&q.vectors);
    }
    return encode_mve1(queries.front().d(), entries);
}

std::vector<QueryEmbedding> decode_queries_json(std::string_view text) {
    const auto doc = parse_json(text);
    const std::size_t dim = json_dim(doc);
    std::vector<QueryEmbedding> queries;
    std::size_t index = 0;
    for (const auto& entry : doc["pages"]) {
        if (!entry.is_object()) {
            throw Error(ErrorCode::MalformedFile, "query entry is not an object");
        }
        std::string id;
        if (entry.contains("query_id") && entry["query_id"].is_string()) {
            id = entry["query_id"].get<std::string>();
        } else if (entry.contains("page_id") && entry["page_id"].is_number_integer()) {
            id = std::to_string(entry["page_id"].get<long long>());
        } else {
            id = std::to_string(index);
        }
        queries.push_back({id, vectors_from_json(entry.value("vectors", nlohmann::json{}), dim, "query " + id)});
        ++index;
    }
    return queries;
}

std::string encode_queries_json(std::span<const QueryEmbedding> queries, std::size_t dim) {
    nlohmann::ordered_json doc;
    doc["doc_id"] = "";
    doc["d"] = dim;
    auto entries = nlohmann::ordered_json::array();
    for (const auto& q : queries) {
        nlohmann::ordered_json entry;
        entry["query_id"] = q.query_id;
        entry["vectors"] = vectors_to_json(q.vectors);
        entries.push_back(std::move(entry));
    }
    doc["pages"] = std::move(entries);
    return doc.dump() + "\n";
}

std::vector<QueryEmbedding> load_queries(const std::filesystem::path& path, EmbeddingFormat format) {
    const auto bytes = io::read_file(path);
    if (sniff(bytes, format) == EmbeddingFormat::Binary) {
        return decode_queries_binary(bytes);
    }
    return decode_queries_json(bytes);
}

void save_queries(std::span<const QueryEmbedding> queries, std::size_t dim,
                  const std::filesystem::path& path, EmbeddingFormat format) {
    io::write_file_atomic(path, format == EmbeddingFormat::Json ? encode_queries_json(queries, dim)
                                                                : encode_queries_binary(queries));
}

double maxsim(const MultiVector& from, const MultiVector& to) {
    if (from.dim() != to.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(from.dim()) + " vs " + std::to_string(to.dim()));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < from.rows(); ++i) {
        const auto qi = from.row(i);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < to.rows(); ++j) {
            best = std::max(best, dot(qi, to.row(j)));
        }
        total += best;
    }
    // Unit rows bound every dot product by 1; clamp absorbs rounding.
    return std::clamp(total / static_cast<double>(from.rows()), -1.0, 1.0);
}

double query_page_score(const QueryEmbedding& query, const PageEmbedding& page) {
    return maxsim(query.vectors, page.vectors);
}

double page_page_similarity(const PageEmbedding& a, const PageEmbedding& b) {
    return 0.5 * (maxsim(a.vectors, b.vectors) + maxsim(b.vectors, a.vectors));
}

}  // namespace pagegraph
