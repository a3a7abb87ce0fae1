#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pagegraph/embedding.hpp"

namespace pagegraph {

struct Edge {
    int i = 0;  // always i < j
    int j = 0;
    double score = 0.0;

    bool operator==(const Edge&) const = default;
};

/// Undirected page-similarity graph over one document.
///
/// Invariants (checked on construction, so they also hold after load):
/// edges are listed once with i < j in strict lexicographic order, endpoints
/// lie in [0, n_pages), and every score is >= theta. Adjacency lists derived
/// from the edge list are therefore symmetric, loop-free and sorted.
/// Edge scores are diagnostic; traversal only reads adjacency.
class PageGraph {
public:
    PageGraph(std::string doc_id, int n_pages, double theta, std::vector<Edge> edges);

    const std::string& doc_id() const noexcept { return doc_id_; }
    int n_pages() const noexcept { return n_pages_; }
    double theta() const noexcept { return theta_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t max_degree() const noexcept;

    /// Sorted ascending; empty for isolated pages. Throws PageOutOfRange.
    const std::vector<int>& neighbors(int page_id) const;

    bool operator==(const PageGraph& other) const {
        return doc_id_ == other.doc_id_ && n_pages_ == other.n_pages_ &&
               theta_ == other.theta_ && edges_ == other.edges_;
    }

private:
    std::string doc_id_;
    int n_pages_;
    double theta_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
};

/// Adds edge (i, j) iff page_page_similarity(p_i, p_j) >= theta. Pair scoring
/// is spread over `threads` workers (0 = hardware concurrency); the result
/// does not depend on the thread count.
PageGraph build_graph(const EmbeddingStore& store, double theta, unsigned threads = 0);

std::string encode_graph_json(const PageGraph& graph);
PageGraph decode_graph_json(std::string_view text);
void save_graph(const PageGraph& graph, const std::filesystem::path& path);
PageGraph load_graph(const std::filesystem::path& path);

}  // namespace pagegraph
