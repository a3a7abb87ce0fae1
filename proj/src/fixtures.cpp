#include "pagegraph/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

#include "pagegraph/error.hpp"
#include "pagegraph/graph.hpp"
#include "pagegraph/io.hpp"

namespace pagegraph {

namespace {

// Gram targets relative to theta: requested edges sit kMargin above it,
// everything else kMargin below, each perturbed by up to kJitter.
constexpr double kMargin = 0.04;
constexpr double kJitter = 0.015;

// Portable draws on top of mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t below(std::size_t n) {
        const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    double gaussian() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

constexpr std::uint64_t kEmbeddingStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kPlantStream = 0xC2B2AE3D27D4EB4FULL;

// One f32 token row: `direction` (unit, length n) in the leading dims plus a
// `noise`-scaled random unit vector in the spare dims.
void append_row(std::vector<float>& out, const Eigen::VectorXd& direction, int d, double noise, Rng& rng) {
    const int n = static_cast<int>(direction.size());
    for (int c = 0; c < n; ++c) {
        out.push_back(static_cast<float>(direction[c]));
    }
    const int spare = d - n;
    if (spare <= 0) {
        return;
    }
    std::vector<double> g(static_cast<std::size_t>(spare));
    double sq = 0.0;
    for (auto& x : g) {
        x = rng.gaussian();
        sq += x * x;
    }
    const double scale = sq > 0.0 ? noise / std::sqrt(sq) : 0.0;
    for (double x : g) {
        out.push_back(static_cast<float>(x * scale));
    }
}

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, int source) {
    std::vector<int> dist(adj.size(), -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

Topology::Kind parse_kind(const std::string& name) {
    if (name == "path") return Topology::Kind::Path;
    if (name == "ring") return Topology::Kind::Ring;
    if (name == "clusters") return Topology::Kind::Clusters;
    if (name == "random") return Topology::Kind::Random;
    throw Error(ErrorCode::ConfigError, "unknown topology '" + name + "'");
}

}  // namespace

std::vector<std::pair<int, int>> topology_edges(const Topology& topology, int n_pages,
                                                std::uint64_t seed) {
    if (n_pages < 1) {
        throw Error(ErrorCode::ValidationError, "n_pages must be >= 1");
    }
    std::vector<std::pair<int, int>> edges;
    switch (topology.kind) {
        case Topology::Kind::Path:
            for (int i = 0; i + 1 < n_pages; ++i) {
                edges.emplace_back(i, i + 1);
            }
            break;
        case Topology::Kind::Ring:
            if (n_pages < 3) {
                throw Error(ErrorCode::InfeasibleTopology, "a ring needs at least 3 pages");
            }
            for (int i = 0; i + 1 < n_pages; ++i) {
                edges.emplace_back(i, i + 1);
            }
            edges.emplace_back(0, n_pages - 1);
            break;
        case Topology::Kind::Clusters: {
            int start = 0;
            for (int size : topology.cluster_sizes) {
                if (size < 1) {
                    throw Error(ErrorCode::InfeasibleTopology, "cluster sizes must be >= 1");
                }
                for (int i = start; i < start + size; ++i) {
                    for (int j = i + 1; j < start + size; ++j) {
                        edges.emplace_back(i, j);
                    }
                }
                start += size;
            }
            if (start != n_pages) {
                throw Error(ErrorCode::InfeasibleTopology, "cluster sizes sum to " + std::to_string(start) +
                                                               ", expected " + std::to_string(n_pages));
            }
            break;
        }
        case Topology::Kind::Random: {
            if (!(topology.p >= 0.0 && topology.p <= 1.0)) {
                throw Error(ErrorCode::ValidationError, "edge probability must be in [0, 1]");
            }
            Rng rng(seed);
            for (int i = 0; i < n_pages; ++i) {
                for (int j = i + 1; j < n_pages; ++j) {
                    if (rng.uniform() < topology.p) {
                        edges.emplace_back(i, j);
                    }
                }
            }
            break;
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

SyntheticCorpus synth(const SyntheticSpec& spec) {
    const int n = spec.n_pages;
    if (n < 1 || spec.k_min < 1 || spec.k_max < spec.k_min || spec.query_k < 1) {
        throw Error(ErrorCode::ValidationError, "need n_pages >= 1 and 1 <= k_min <= k_max, query_k >= 1");
    }
    if (spec.d < n) {
        throw Error(ErrorCode::InfeasibleTopology,
                    "d=" + std::to_string(spec.d) + " cannot hold " + std::to_string(n) + " page directions");
    }
    const double hi = spec.theta + kMargin;
    const double lo = spec.theta - kMargin;
    if (hi + kJitter >= 1.0 || lo - kJitter <= -1.0) {
        throw Error(ErrorCode::InfeasibleTopology, "theta leaves no room for edge margins");
    }

    SyntheticCorpus corpus;
    corpus.edges = topology_edges(spec.topology, n, spec.seed);
    Rng rng(spec.seed ^ kEmbeddingStream);

    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(n, n);
    {
        std::vector<char> linked(static_cast<std::size_t>(n) * n, 0);
        for (const auto& [i, j] : corpus.edges) {
            linked[static_cast<std::size_t>(i) * n + j] = 1;
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double base = linked[static_cast<std::size_t>(i) * n + j] ? hi : lo;
                gram(i, j) = gram(j, i) = base + rng.uniform(-kJitter, kJitter);
            }
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::InfeasibleTopology, "page similarity pattern is not realizable (Gram matrix not positive definite)");
    }
    const Eigen::MatrixXd directions = llt.matrixL();  // row i has unit norm

    corpus.store.doc_id = spec.doc_id;
    corpus.store.dim = static_cast<std::size_t>(spec.d);
    for (int i = 0; i < n; ++i) {
        const int k = spec.k_min + static_cast<int>(rng.below(static_cast<std::size_t>(spec.k_max - spec.k_min + 1)));
        std::vector<float> raw;
        const Eigen::VectorXd dir = directions.row(i).transpose();
        for (int r = 0; r < k; ++r) {
            append_row(raw, dir, spec.d, spec.noise, rng);
        }
        corpus.store.pages.push_back({i, MultiVector(std::move(raw), static_cast<std::size_t>(k),
                                                     static_cast<std::size_t>(spec.d))});
    }

    const PageGraph realized = build_graph(corpus.store, spec.theta, 1);
    std::vector<std::pair<int, int>> realized_edges;
    for (const auto& e : realized.edges()) {
        realized_edges.emplace_back(e.i, e.j);
    }
    if (realized_edges != corpus.edges) {
        throw Error(ErrorCode::InfeasibleTopology, "realized graph differs from the requested topology");
    }

    for (const auto& q : spec.queries) {
        if (q.evidence_pages.empty()) {
            throw Error(ErrorCode::EmptyGroundTruth, "planted query " + q.query_id + " has no evidence");
        }
        auto in_range = [n](int p) { return p >= 0 && p < n; };
        if (!std::all_of(q.evidence_pages.begin(), q.evidence_pages.end(), in_range) ||
            !std::all_of(q.semantic_peaks.begin(), q.semantic_peaks.end(), in_range)) {
            throw Error(ErrorCode::PageOutOfRange, "planted query " + q.query_id + " cites a page out of range");
        }
        Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
        for (int p : q.semantic_peaks) {
            target += directions.row(p).transpose();
        }
        for (int e : q.evidence_pages) {
            if (!q.semantic_peaks.count(e)) {
                target += spec.evidence_weight * directions.row(e).transpose();
            }
        }
        if (target.norm() < 1e-9) {
            throw Error(ErrorCode::ValidationError, "planted query " + q.query_id + " has no direction");
        }
        target.normalize();
        std::vector<float> raw;
        for (int r = 0; r < spec.query_k; ++r) {
            append_row(raw, target, spec.d, spec.noise, rng);
        }
        corpus.queries.push_back({q.query_id, MultiVector(std::move(raw), static_cast<std::size_t>(spec.query_k),
                                                          static_cast<std::size_t>(spec.d))});

        for (int p = 0; p < n; ++p) {
            int score = q.evidence_pages.count(p) ? 5 : spec.default_logical;
            if (const auto it = q.logical_scores.find(p); it != q.logical_scores.end()) {
                score = it->second;
            }
            corpus.fixture.push_back({q.query_id, p, LogicalScore(score).value()});
        }
        corpus.samples.push_back({q.query_id, spec.doc_id, q.question, q.evidence_pages, std::nullopt});
    }
    return corpus;
}

std::vector<PlantedQuery> plant_queries(const std::vector<std::pair<int, int>>& edges, int n_pages,
                                        const PlantOptions& options, std::uint64_t seed) {
    if (options.evidence_size < 1 || options.min_hops < 0 || options.max_hops < options.min_hops ||
        options.distractor_max < 1 || options.distractor_max > 5) {
        throw Error(ErrorCode::ValidationError, "invalid plant options");
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_pages));
    for (const auto& [i, j] : edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    Rng rng(seed ^ kPlantStream);
    std::vector<PlantedQuery> out;
    for (int q = 0; q < options.count; ++q) {
        bool planted = false;
        for (int attempt = 0; attempt < 1000 && !planted; ++attempt) {
            const int peak = static_cast<int>(rng.below(static_cast<std::size_t>(n_pages)));
            const auto dist = bfs_distances(adj, peak);
            std::vector<int> pool;
            for (int p = 0; p < n_pages; ++p) {
                if (p != peak && dist[p] >= options.min_hops && dist[p] <= options.max_hops) {
                    pool.push_back(p);
                }
            }
            if (static_cast<int>(pool.size()) < options.evidence_size) {
                continue;
            }
            PlantedQuery query;
            query.query_id = "q" + std::to_string(q);
            query.question = "synthetic question " + std::to_string(q);
            query.semantic_peaks = {peak};
            for (int e = 0; e < options.evidence_size; ++e) {
                const std::size_t pick = e + rng.below(pool.size() - static_cast<std::size_t>(e));
                std::swap(pool[static_cast<std::size_t>(e)], pool[pick]);
                query.evidence_pages.insert(pool[static_cast<std::size_t>(e)]);
            }
            for (int p = 0; p < n_pages; ++p) {
                query.logical_scores[p] =
                    query.evidence_pages.count(p)
                        ? 5
                        : 1 + static_cast<int>(rng.below(static_cast<std::size_t>(options.distractor_max)));
            }
            out.push_back(std::move(query));
            planted = true;
        }
        if (!planted) {
            throw Error(ErrorCode::InfeasibleTopology, "no page has enough evidence candidates in range");
        }
    }
    return out;
}

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
    try {
        const auto doc = nlohmann::json::parse(json_text);
        SyntheticSpec spec;
        spec.doc_id = doc.value("doc_id", spec.doc_id);
        spec.n_pages = doc.at("n_pages").get<int>();
        spec.d = doc.value("d", spec.d);
        spec.k_min = doc.value("k_min", spec.k_min);
        spec.k_max = doc.value("k_max", spec.k_min);
        spec.query_k = doc.value("query_k", spec.query_k);
        spec.seed = doc.value("seed", spec.seed);
        spec.theta = doc.value("theta", spec.theta);
        spec.default_logical = doc.value("default_logical", spec.default_logical);
        spec.evidence_weight = doc.value("evidence_weight", spec.evidence_weight);
        spec.noise = doc.value("noise", spec.noise);
        const auto& topo = doc.at("topology");
        spec.topology.kind = parse_kind(topo.at("kind").get<std::string>());
        spec.topology.cluster_sizes = topo.value("sizes", std::vector<int>{});
        spec.topology.p = topo.value("p", 0.0);
        for (const auto& q : doc.value("queries", nlohmann::json::array())) {
            PlantedQuery pq;
            pq.query_id = q.at("query_id").get<std::string>();
            pq.question = q.value("question", pq.query_id);
            for (int p : q.at("evidence_pages").get<std::vector<int>>()) pq.evidence_pages.insert(p);
            for (int p : q.value("semantic_peaks", std::vector<int>{})) pq.semantic_peaks.insert(p);
            for (const auto& [key, value] : q.value("logical_scores", nlohmann::json::object()).items()) {
                pq.logical_scores[std::stoi(key)] = value.get<int>();
            }
            spec.queries.push_back(std::move(pq));
        }
        if (doc.contains("plant")) {
            const auto& p = doc["plant"];
            PlantOptions opts;
            opts.count = p.value("count", opts.count);
            opts.evidence_size = p.value("evidence_size", opts.evidence_size);
            opts.min_hops = p.value("min_hops", opts.min_hops);
            opts.max_hops = p.value("max_hops", opts.max_hops);
            opts.distractor_max = p.value("distractor_max", opts.distractor_max);
            auto planted = plant_queries(topology_edges(spec.topology, spec.n_pages, spec.seed),
                                         spec.n_pages, opts, spec.seed);
            spec.queries.insert(spec.queries.end(), planted.begin(), planted.end());
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, std::string("synthetic spec: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw Error(ErrorCode::MalformedFile, "synthetic spec: logical_scores keys must be page ids");
    }
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_store(corpus.store, dir / (corpus.store.doc_id + ".mve"), EmbeddingFormat::Binary);
    if (!corpus.queries.empty()) {
        save_queries(corpus.queries, corpus.store.dim, dir / "queries.json", EmbeddingFormat::Json);
    }
    io::write_file_atomic(dir / "fixture.jsonl", encode_fixture_jsonl(corpus.fixture));
    io::write_file_atomic(dir / "eval.jsonl", encode_eval_jsonl(corpus.samples));
}

}  // namespace pagegraph
