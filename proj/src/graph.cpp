#include "pagegraph/graph.hpp"

#include <algorithm>
#include <thread>

#include <json.hpp>

#include "pagegraph/error.hpp"
#include "pagegraph/io.hpp"

namespace pagegraph {

PageGraph::PageGraph(std::string doc_id, int n_pages, double theta, std::vector<Edge> edges)
    : doc_id_(std::move(doc_id)), n_pages_(n_pages), theta_(theta), edges_(std::move(edges)) {
    if (n_pages_ < 1) {
        throw Error(ErrorCode::InvariantViolation, "graph needs at least one page");
    }
    if (!(theta_ >= -1.0 && theta_ <= 1.0)) {
        throw Error(ErrorCode::InvariantViolation, "theta outside [-1, 1]");
    }
    adjacency_.assign(static_cast<std::size_t>(n_pages_), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        const std::string where = "edge [" + std::to_string(edge.i) + ", " + std::to_string(edge.j) + "]";
        if (edge.i < 0 || edge.j < 0 || edge.i >= n_pages_ || edge.j >= n_pages_) {
            throw Error(ErrorCode::InvariantViolation, where + " out of range");
        }
        if (edge.i == edge.j) {
            throw Error(ErrorCode::InvariantViolation, where + " is a self-loop");
        }
        if (edge.i > edge.j) {
            throw Error(ErrorCode::InvariantViolation, where + " is not listed as i < j");
        }
        if (e > 0) {
            const Edge& prev = edges_[e - 1];
            if (std::pair(prev.i, prev.j) >= std::pair(edge.i, edge.j)) {
                throw Error(ErrorCode::InvariantViolation, where + " breaks lexicographic order");
            }
        }
        if (!(edge.score >= theta_)) {
            throw Error(ErrorCode::InvariantViolation, where + " scores below theta");
        }
        adjacency_[edge.i].push_back(edge.j);
        adjacency_[edge.j].push_back(edge.i);
    }
    for (auto& list : adjacency_) {
        std::sort(list.begin(), list.end());
    }
}

std::size_t PageGraph::max_degree() const noexcept {
    std::size_t best = 0;
    for (const auto& list : adjacency_) {
        best = std::max(best, list.size());
    }
    return best;
}

const std::vector<int>& PageGraph::neighbors(int page_id) const {
    if (page_id < 0 || page_id >= n_pages_) {
        throw Error(ErrorCode::PageOutOfRange,
                    "page " + std::to_string(page_id) + " not in [0, " + std::to_string(n_pages_) + ")");
    }
    return adjacency_[static_cast<std::size_t>(page_id)];
}

PageGraph build_graph(const EmbeddingStore& store, double theta, unsigned threads) {
    const std::size_t n = store.size();
    if (n == 0) {
        throw Error(ErrorCode::ValidationError, "cannot build a graph over an empty store");
    }
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

    // Row i holds the accepted partners j > i, in ascending j.
    std::vector<std::vector<Edge>> rows(n);
    auto work = [&](unsigned worker) {
        for (std::size_t i = worker; i < n; i += threads) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double s = page_page_similarity(store.pages[i], store.pages[j]);
                if (s >= theta) {
                    rows[i].push_back({static_cast<int>(i), static_cast<int>(j), s});
                }
            }
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t);
        }
    }

    std::vector<Edge> edges;
    for (auto& row : rows) {
        edges.insert(edges.end(), row.begin(), row.end());
    }
    return PageGraph(store.doc_id, static_cast<int>(n), theta, std::move(edges));
}

std::string encode_graph_json(const PageGraph& graph) {
    nlohmann::ordered_json doc;
    doc["doc_id"] = graph.doc_id();
    doc["n_pages"] = graph.n_pages();
    doc["theta"] = graph.theta();
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : graph.edges()) {
        edges.push_back(nlohmann::ordered_json::array({e.i, e.j, e.score}));
    }
    doc["edges"] = std::move(edges);
    return doc.dump() + "\n";
}

PageGraph decode_graph_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::MalformedFile, e.what());
    }
    if (!doc.is_object() || !doc.contains("n_pages") || !doc["n_pages"].is_number_integer() ||
        !doc.contains("theta") || !doc["theta"].is_number() || !doc.contains("edges") ||
        !doc["edges"].is_array()) {
        throw Error(ErrorCode::MalformedFile, "graph JSON needs n_pages, theta and edges");
    }
    std::vector<Edge> edges;
    edges.reserve(doc["edges"].size());
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
            !e[1].is_number_integer() || !e[2].is_number()) {
            throw Error(ErrorCode::MalformedFile, "edge must be [int, int, number]");
        }
        edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    return PageGraph(doc.value("doc_id", std::string{}), doc["n_pages"].get<int>(),
                     doc["theta"].get<double>(), std::move(edges));
}

void save_graph(const PageGraph& graph, const std::filesystem::path& path) {
    io::write_file_atomic(path, encode_graph_json(graph));
}

PageGraph load_graph(const std::filesystem::path& path) {
    return decode_graph_json(io::read_file(path));
}

}  // namespace pagegraph
