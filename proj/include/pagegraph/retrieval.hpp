#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pagegraph/embedding.hpp"
#include "pagegraph/error.hpp"
#include "pagegraph/graph.hpp"
#include "pagegraph/oracle.hpp"

namespace pagegraph {

enum class Mode {
    Graph,         // "molorag": graph traversal with combined scores
    LogiOnly,      // traversal ranked by logical relevance alone
    Full,          // every page scored, graph ignored
    SemanticOnly,  // no oracle; ranked by normalized semantic score
};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);

struct TraversalConfig {
    int w = 3;
    int n_hop = 4;
    Mode mode = Mode::Graph;
    double combine_weight = 0.5;  // weight on the semantic term
    unsigned concurrency = 1;     // oracle calls in flight per frontier

    void validate() const;
};

struct ScoredPage {
    int page_id = 0;
    double s_sem = 0.0;
    double s_sem_norm = 0.0;
    std::optional<LogicalScore> s_logi;
    double s = 0.0;
    int hop_discovered = 0;

    bool operator==(const ScoredPage&) const = default;
};

struct RetrievalRun {
    std::string query_id;
    Mode mode = Mode::Graph;
    int n_pages = 0;
    std::vector<ScoredPage> visited;  // descending s, ties by ascending page_id
    int queried_pages = 0;            // logical-oracle calls made
    int hops_used = 0;
    std::vector<int> semantic_order;          // all pages, used to fill short top-K lists
    std::vector<std::vector<int>> frontiers;  // exploration set after each hop, [0] = initial

    bool operator==(const RetrievalRun&) const = default;
};

/// Raised when the oracle fails mid-run; carries everything merged so far.
class TraversalAborted : public Error {
public:
    TraversalAborted(ErrorCode cause, const std::string& message, RetrievalRun partial)
        : Error(cause, message), partial_(std::move(partial)) {}

    const RetrievalRun& partial() const noexcept { return partial_; }

private:
    RetrievalRun partial_;
};

struct SemanticHit {
    int page_id = 0;
    double score = 0.0;
};

/// Every page scored with query_page_score, descending, ties by page_id.
std::vector<SemanticHit> semantic_rank(const QueryEmbedding& query, const EmbeddingStore& store);

/// Min-max over the document; a flat list maps to 0.5 everywhere.
std::vector<double> normalize_semantic(std::span<const double> scores);

/// weight * s_sem_norm + (1 - weight) * (s_logi - 1) / 4
double combine(double s_sem_norm, LogicalScore s_logi, double weight);

struct QueryContext {
    std::string query_id;
    std::string query_text;
    std::string doc_id;
};

/// Runs the configured mode over precomputed raw semantic scores, one per
/// page in page_id order. `oracle` may be null only for SemanticOnly.
RetrievalRun traverse(const QueryContext& query, std::span<const double> s_sem,
                      const PageGraph& graph, const LogicalOracle* oracle,
                      const TraversalConfig& config);

RetrievalRun traverse(const QueryEmbedding& query, std::string_view query_text,
                      const EmbeddingStore& store, const PageGraph& graph,
                      const LogicalOracle* oracle, const TraversalConfig& config);

/// First K visited pages, then unvisited pages in semantic order.
std::vector<int> topk(const RetrievalRun& run, int k);

std::string encode_run_json(const RetrievalRun& run);
RetrievalRun decode_run_json(std::string_view text);

}  // namespace pagegraph
