#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unistd.h>

namespace testing_support {

namespace fs = std::filesystem;
using namespace pagegraph;

TempDir::TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("pagegraph-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
}

MultiVector multivector(const Rows& rows) {
    std::vector<float> raw;
    for (const auto& r : rows) {
        for (double x : r) {
            raw.push_back(static_cast<float>(x));
        }
    }
    return MultiVector(std::move(raw), rows.size(), rows.empty() ? 0 : rows[0].size());
}

EmbeddingStore make_store(const std::vector<Rows>& pages, const std::string& doc_id) {
    EmbeddingStore store;
    store.doc_id = doc_id;
    store.dim = pages.at(0).at(0).size();
    for (std::size_t i = 0; i < pages.size(); ++i) {
        store.pages.push_back({static_cast<int>(i), multivector(pages[i])});
    }
    return store;
}

QueryEmbedding make_query(const std::string& id, const Rows& rows) {
    return {id, multivector(rows)};
}

EmbeddingStore random_store(std::mt19937_64& rng, int n, int d, int k_max) {
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> kd(1, k_max);
    std::vector<Rows> pages;
    for (int i = 0; i < n; ++i) {
        Rows rows(static_cast<std::size_t>(kd(rng)), std::vector<double>(static_cast<std::size_t>(d)));
        for (auto& r : rows) {
            for (auto& x : r) {
                x = g(rng);
            }
        }
        pages.push_back(std::move(rows));
    }
    return make_store(pages);
}

namespace {

std::vector<std::vector<double>> unit_rows(const MultiVector& m) {
    std::vector<std::vector<double>> out;
    const auto raw = m.raw();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::vector<double> v(raw.begin() + r * m.dim(), raw.begin() + (r + 1) * m.dim());
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace

double ref_maxsim(const MultiVector& from, const MultiVector& to) {
    const auto a = unit_rows(from);
    const auto b = unit_rows(to);
    double total = 0.0;
    for (const auto& x : a) {
        double best = -2.0;
        for (const auto& y : b) {
            double dot = 0.0;
            for (std::size_t c = 0; c < x.size(); ++c) dot += x[c] * y[c];
            best = std::max(best, dot);
        }
        total += best;
    }
    return total / static_cast<double>(a.size());
}

double ref_pair_similarity(const MultiVector& a, const MultiVector& b) {
    return 0.5 * (ref_maxsim(a, b) + ref_maxsim(b, a));
}

std::set<std::pair<int, int>> ref_edges(const EmbeddingStore& store, double theta) {
    std::set<std::pair<int, int>> out;
    for (std::size_t i = 0; i < store.size(); ++i) {
        for (std::size_t j = i + 1; j < store.size(); ++j) {
            if (ref_pair_similarity(store.pages[i].vectors, store.pages[j].vectors) >= theta) {
                out.insert({static_cast<int>(i), static_cast<int>(j)});
            }
        }
    }
    return out;
}

std::vector<int> bfs_distances(const PageGraph& graph, int source) {
    std::vector<int> dist(static_cast<std::size_t>(graph.n_pages()), -1);
    std::deque<int> q{source};
    dist[source] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int v : graph.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    return dist;
}

bool connected(const PageGraph& graph) {
    const auto d = bfs_distances(graph, 0);
    return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

MockOracle oracle_for(const std::string& query_id, const std::vector<int>& scores) {
    std::vector<FixtureEntry> entries;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        entries.push_back({query_id, static_cast<int>(i), scores[i]});
    }
    return MockOracle(entries);
}

RefMetrics ref_metrics(const std::vector<int>& retrieved, const std::set<int>& gt, int k) {
    const std::size_t cut = std::min<std::size_t>(retrieved.size(), static_cast<std::size_t>(k));
    int found = 0;
    double rr = 0.0;
    for (std::size_t i = 0; i < cut; ++i) {
        if (gt.find(retrieved[i]) != gt.end()) {
            ++found;
            if (rr == 0.0) rr = 1.0 / static_cast<double>(i + 1);
        }
    }
    const std::size_t m = std::min<std::size_t>(gt.size(), static_cast<std::size_t>(k));
    double dcg = 0.0, idcg = 0.0;
    for (std::size_t pos = 1; pos <= m; ++pos) {
        idcg += 1.0 / std::log2(static_cast<double>(pos + 1));
        if (pos <= cut && gt.count(retrieved[pos - 1])) {
            dcg += 1.0 / std::log2(static_cast<double>(pos + 1));
        }
    }
    return {static_cast<double>(found) / static_cast<double>(gt.size()),
            static_cast<double>(found) / static_cast<double>(k), dcg / idcg, rr};
}

}  // namespace testing_support
