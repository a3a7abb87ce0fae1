#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pagegraph/embedding.hpp"
#include "pagegraph/metrics.hpp"
#include "pagegraph/oracle.hpp"

namespace pagegraph {

struct Topology {
    enum class Kind { Path, Ring, Clusters, Random };

    Kind kind = Kind::Path;
    std::vector<int> cluster_sizes;  // Clusters: must sum to n_pages
    double p = 0.0;                  // Random: independent edge probability
};

struct PlantedQuery {
    std::string query_id;
    std::string question;
    std::set<int> evidence_pages;
    std::set<int> semantic_peaks;
    std::map<int, int> logical_scores;  // overrides; evidence defaults to 5
};

struct SyntheticSpec {
    std::string doc_id = "synthetic";
    int n_pages = 10;
    int d = 32;
    int k_min = 1;
    int k_max = 1;
    int query_k = 1;
    Topology topology;
    std::vector<PlantedQuery> queries;
    std::uint64_t seed = 0;
    int default_logical = 1;
    double theta = 0.4;
    // Relative weight of evidence pages in the query direction (peaks = 1).
    double evidence_weight = 0.5;
    double noise = 0.05;
};

struct SyntheticCorpus {
    EmbeddingStore store;
    std::vector<QueryEmbedding> queries;
    std::vector<FixtureEntry> fixture;
    std::vector<EvalSample> samples;
    std::vector<std::pair<int, int>> edges;  // the requested topology, i < j, sorted
};

/// Requested edge set for a topology (Random draws from `seed`).
std::vector<std::pair<int, int>> topology_edges(const Topology& topology, int n_pages,
                                                std::uint64_t seed);

/// Builds embeddings whose page graph at `theta` is exactly the requested
/// topology, plus planted queries, a complete mock-oracle fixture and the
/// matching eval samples.
///
/// Pages are realized through a Gram matrix: pairwise cosines sit just above
/// theta for requested edges and just below it otherwise, and a Cholesky
/// factor provides the page directions. Each token row is that direction plus
/// a small perturbation in the spare dimensions. Raises InfeasibleTopology
/// when d < n_pages, the Gram matrix is not positive definite, or the
/// realized graph differs from the request.
SyntheticCorpus synth(const SyntheticSpec& spec);

struct PlantOptions {
    int count = 10;
    int evidence_size = 1;
    int min_hops = 1;      // graph distance from the semantic peak to evidence
    int max_hops = 4;
    int distractor_max = 2;  // non-evidence pages get logical scores in 1..distractor_max
};

/// Planted queries with one semantic peak each and evidence pages drawn at
/// graph distance [min_hops, max_hops] from the peak, so semantic and logical
/// relevance disagree by construction.
std::vector<PlantedQuery> plant_queries(const std::vector<std::pair<int, int>>& edges, int n_pages,
                                        const PlantOptions& options, std::uint64_t seed);

SyntheticSpec parse_synthetic_spec(std::string_view json_text);

/// Writes embeddings.mve, queries.json, fixture.jsonl and eval.jsonl.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace pagegraph
