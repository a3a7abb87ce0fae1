#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pagegraph/embedding.hpp"
#include "pagegraph/graph.hpp"
#include "pagegraph/oracle.hpp"

namespace testing_support {

using Rows = std::vector<std::vector<double>>;

struct TempDir {
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path;
};

pagegraph::MultiVector multivector(const Rows& rows);
pagegraph::EmbeddingStore make_store(const std::vector<Rows>& pages, const std::string& doc_id = "doc");
pagegraph::QueryEmbedding make_query(const std::string& id, const Rows& rows);

// Gaussian rows, k in [1, k_max].
pagegraph::EmbeddingStore random_store(std::mt19937_64& rng, int n, int d, int k_max);

// Straight from the definitions, on f32 inputs renormalized here.
double ref_maxsim(const pagegraph::MultiVector& from, const pagegraph::MultiVector& to);
double ref_pair_similarity(const pagegraph::MultiVector& a, const pagegraph::MultiVector& b);
std::set<std::pair<int, int>> ref_edges(const pagegraph::EmbeddingStore& store, double theta);

std::vector<int> bfs_distances(const pagegraph::PageGraph& graph, int source);
bool connected(const pagegraph::PageGraph& graph);

// Mock fixture for one query: score per page.
pagegraph::MockOracle oracle_for(const std::string& query_id, const std::vector<int>& scores);

// Independent metric evaluator (written without sharing code with the library).
struct RefMetrics {
    double recall, precision, ndcg, mrr;
};
RefMetrics ref_metrics(const std::vector<int>& retrieved, const std::set<int>& gt, int k);

}  // namespace testing_support
