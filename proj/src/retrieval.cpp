#include "pagegraph/retrieval.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <numeric>

#include <json.hpp>

namespace pagegraph {

namespace {

bool by_score_then_id(const ScoredPage& a, const ScoredPage& b) {
    if (a.s != b.s) {
        return a.s > b.s;
    }
    return a.page_id < b.page_id;
}

std::vector<int> semantic_order_of(std::span<const double> s_sem) {
    std::vector<int> order(s_sem.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return s_sem[a] > s_sem[b]; });
    return order;
}

// Scores one batch of pages (ascending page_id) against the oracle and merges
// the results in that order. Completion order never leaks into the output.
class BatchScorer {
public:
    BatchScorer(const QueryContext& query, std::span<const double> s_sem,
                std::span<const double> s_norm, const LogicalOracle& oracle, double weight,
                unsigned concurrency)
        : query_(query), s_sem_(s_sem), s_norm_(s_norm), oracle_(oracle), weight_(weight),
          concurrency_(std::max(1u, concurrency)) {}

    // Appends scored pages to `out`. On failure, pages before the first failing
    // one are still appended and the failure is rethrown.
    void score(const std::vector<int>& ids, int hop, std::vector<ScoredPage>& out) const {
        std::size_t next = 0;
        while (next < ids.size()) {
            const std::size_t end = std::min(ids.size(), next + concurrency_);
            std::vector<std::optional<LogicalScore>> results(end - next);
            std::vector<std::exception_ptr> failures(end - next);
            if (concurrency_ == 1) {
                try {
                    results[0] = oracle_.score(request(ids[next]));
                } catch (...) {
                    failures[0] = std::current_exception();
                }
            } else {
                std::vector<std::future<LogicalScore>> pending;
                for (std::size_t i = next; i < end; ++i) {
                    pending.push_back(std::async(std::launch::async,
                                                 [this, id = ids[i]] { return oracle_.score(request(id)); }));
                }
                for (std::size_t i = 0; i < pending.size(); ++i) {
                    try {
                        results[i] = pending[i].get();
                    } catch (...) {
                        failures[i] = std::current_exception();
                    }
                }
            }
            for (std::size_t i = 0; i < results.size(); ++i) {
                if (failures[i]) {
                    std::rethrow_exception(failures[i]);
                }
                const int id = ids[next + i];
                out.push_back({id, s_sem_[id], s_norm_[id], results[i],
                               combine(s_norm_[id], *results[i], weight_), hop});
            }
            next = end;
        }
    }

private:
    OracleRequest request(int page_id) const {
        return {query_.query_id, query_.query_text,
                {query_.doc_id, page_id, page_image_ref(query_.doc_id, page_id)}};
    }

    const QueryContext& query_;
    std::span<const double> s_sem_;
    std::span<const double> s_norm_;
    const LogicalOracle& oracle_;
    double weight_;
    unsigned concurrency_;
};

}  // namespace

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::Graph: return "molorag";
        case Mode::LogiOnly: return "logi_only";
        case Mode::Full: return "full";
        case Mode::SemanticOnly: return "semantic_only";
    }
    return "unknown";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::Graph, Mode::LogiOnly, Mode::Full, Mode::SemanticOnly}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw Error(ErrorCode::ConfigError, "unknown mode '" + std::string(name) +
                                            "' (molorag, logi_only, full, semantic_only)");
}

void TraversalConfig::validate() const {
    if (w < 1) {
        throw Error(ErrorCode::ConfigError, "w must be >= 1");
    }
    if (n_hop < 0) {
        throw Error(ErrorCode::ConfigError, "n_hop must be >= 0");
    }
    if (!(combine_weight >= 0.0 && combine_weight <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "combine_weight must be in [0, 1]");
    }
}

std::vector<SemanticHit> semantic_rank(const QueryEmbedding& query, const EmbeddingStore& store) {
    std::vector<double> scores;
    scores.reserve(store.size());
    for (const auto& page : store.pages) {
        scores.push_back(query_page_score(query, page));
    }
    std::vector<SemanticHit> hits;
    hits.reserve(scores.size());
    for (int id : semantic_order_of(scores)) {
        hits.push_back({id, scores[id]});
    }
    return hits;
}

std::vector<double> normalize_semantic(std::span<const double> scores) {
    if (scores.empty()) {
        throw Error(ErrorCode::ValidationError, "cannot normalize an empty score list");
    }
    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    std::vector<double> out(scores.size(), 0.5);
    if (hi == lo) {
        return out;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = (scores[i] - lo) / (hi - lo);
    }
    return out;
}

double combine(double s_sem_norm, LogicalScore s_logi, double weight) {
    return weight * s_sem_norm + (1.0 - weight) * s_logi.unit();
}

RetrievalRun traverse(const QueryContext& query, std::span<const double> s_sem,
                      const PageGraph& graph, const LogicalOracle* oracle,
                      const TraversalConfig& config) {
    config.validate();
    const int n = static_cast<int>(s_sem.size());
    if (n == 0) {
        throw Error(ErrorCode::ValidationError, "no pages to rank");
    }
    if (graph.n_pages() != n) {
        throw Error(ErrorCode::DimensionMismatch, "graph has " + std::to_string(graph.n_pages()) +
                                                      " pages, scores cover " + std::to_string(n));
    }
    if (oracle == nullptr && config.mode != Mode::SemanticOnly) {
        throw Error(ErrorCode::ConfigError, "mode " + std::string(to_string(config.mode)) +
                                                " needs a logical oracle");
    }

    const std::vector<double> s_norm = normalize_semantic(s_sem);
    RetrievalRun run;
    run.query_id = query.query_id;
    run.mode = config.mode;
    run.n_pages = n;
    run.semantic_order = semantic_order_of(s_sem);

    auto finish = [&run] {
        std::sort(run.visited.begin(), run.visited.end(), by_score_then_id);
        return run;
    };

    if (config.mode == Mode::SemanticOnly) {
        for (int id = 0; id < n; ++id) {
            run.visited.push_back({id, s_sem[id], s_norm[id], std::nullopt, s_norm[id], 0});
        }
        return finish();
    }

    const MemoizedOracle memo(*oracle);
    const double weight = config.mode == Mode::LogiOnly ? 0.0 : config.combine_weight;
    const BatchScorer scorer(query, s_sem, s_norm, memo, weight, config.concurrency);

    auto score_batch = [&](const std::vector<int>& ids, int hop) {
        const std::size_t before = run.visited.size();
        try {
            scorer.score(ids, hop, run.visited);
        } catch (const Error& e) {
            run.queried_pages = static_cast<int>(run.visited.size());
            throw TraversalAborted(e.code(), e.what(), finish());
        }
        run.queried_pages = static_cast<int>(run.visited.size());
        return std::span<const ScoredPage>(run.visited).subspan(before);
    };

    if (config.mode == Mode::Full) {
        std::vector<int> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), 0);
        score_batch(all, 0);
        run.frontiers.push_back(all);
        return finish();
    }

    // Exploration set initialization: top-w by raw semantic score.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> frontier(run.semantic_order.begin(),
                              run.semantic_order.begin() + std::min(config.w, n));
    std::sort(frontier.begin(), frontier.end());
    for (int id : frontier) {
        seen[id] = 1;
    }
    score_batch(frontier, 0);
    run.frontiers.push_back(frontier);

    for (int hop = 1; hop <= config.n_hop; ++hop) {
        std::vector<int> candidates;
        for (int id : frontier) {
            for (int nb : graph.neighbors(id)) {
                if (!seen[nb]) {
                    seen[nb] = 1;
                    candidates.push_back(nb);
                }
            }
        }
        if (candidates.empty()) {
            break;
        }
        std::sort(candidates.begin(), candidates.end());
        const auto scored = score_batch(candidates, hop);
        run.hops_used = hop;

        std::vector<ScoredPage> ranked(scored.begin(), scored.end());
        std::sort(ranked.begin(), ranked.end(), by_score_then_id);
        ranked.resize(std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(config.w)));
        frontier.clear();
        for (const auto& p : ranked) {
            frontier.push_back(p.page_id);
        }
        std::sort(frontier.begin(), frontier.end());
        run.frontiers.push_back(frontier);
    }
    return finish();
}

RetrievalRun traverse(const QueryEmbedding& query, std::string_view query_text,
                      const EmbeddingStore& store, const PageGraph& graph,
                      const LogicalOracle* oracle, const TraversalConfig& config) {
    if (query.d() != store.dim) {
        throw Error(ErrorCode::DimensionMismatch, "query d=" + std::to_string(query.d()) +
                                                      ", store d=" + std::to_string(store.dim));
    }
    std::vector<double> s_sem;
    s_sem.reserve(store.size());
    for (const auto& page : store.pages) {
        s_sem.push_back(query_page_score(query, page));
    }
    const QueryContext ctx{query.query_id,
                           query_text.empty() ? query.query_id : std::string(query_text),
                           store.doc_id};
    return traverse(ctx, s_sem, graph, oracle, config);
}

std::vector<int> topk(const RetrievalRun& run, int k) {
    if (k < 1) {
        throw Error(ErrorCode::ValidationError, "K must be >= 1");
    }
    if (k > run.n_pages) {
        throw Error(ErrorCode::KExceedsDocument,
                    "K=" + std::to_string(k) + " > " + std::to_string(run.n_pages) + " pages");
    }
    std::vector<int> out;
    std::vector<char> taken(static_cast<std::size_t>(run.n_pages), 0);
    for (const auto& p : run.visited) {
        if (static_cast<int>(out.size()) == k) {
            return out;
        }
        out.push_back(p.page_id);
        taken[p.page_id] = 1;
    }
    for (int id : run.semantic_order) {
        if (static_cast<int>(out.size()) == k) {
            break;
        }
        if (!taken[id]) {
            out.push_back(id);
            taken[id] = 1;
        }
    }
    return out;
}

std::string encode_run_json(const RetrievalRun& run) {
    nlohmann::ordered_json doc;
    doc["query_id"] = run.query_id;
    doc["mode"] = to_string(run.mode);
    auto visited = nlohmann::ordered_json::array();
    for (const auto& p : run.visited) {
        nlohmann::ordered_json row;
        row["page_id"] = p.page_id;
        row["s_sem"] = p.s_sem;
        row["s_sem_norm"] = p.s_sem_norm;
        row["s_logi"] = p.s_logi ? nlohmann::ordered_json(p.s_logi->value()) : nlohmann::ordered_json(nullptr);
        row["s"] = p.s;
        row["hop"] = p.hop_discovered;
        visited.push_back(std::move(row));
    }
    doc["visited"] = std::move(visited);
    doc["queried_pages"] = run.queried_pages;
    doc["hops_used"] = run.hops_used;
    doc["n_pages"] = run.n_pages;
    doc["semantic_order"] = run.semantic_order;
    doc["frontiers"] = run.frontiers;
    return doc.dump() + "\n";
}

RetrievalRun decode_run_json(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        RetrievalRun run;
        run.query_id = doc.at("query_id").get<std::string>();
        run.mode = parse_mode(doc.at("mode").get<std::string>());
        for (const auto& row : doc.at("visited")) {
            ScoredPage p;
            p.page_id = row.at("page_id").get<int>();
            p.s_sem = row.at("s_sem").get<double>();
            p.s_sem_norm = row.at("s_sem_norm").get<double>();
            if (!row.at("s_logi").is_null()) {
                p.s_logi = LogicalScore(row.at("s_logi").get<int>());
            }
            p.s = row.at("s").get<double>();
            p.hop_discovered = row.at("hop").get<int>();
            run.visited.push_back(p);
        }
        run.queried_pages = doc.at("queried_pages").get<int>();
        run.hops_used = doc.at("hops_used").get<int>();
        run.n_pages = doc.at("n_pages").get<int>();
        run.semantic_order = doc.at("semantic_order").get<std::vector<int>>();
        if (doc.contains("frontiers")) {
            run.frontiers = doc["frontiers"].get<std::vector<std::vector<int>>>();
        }
        return run;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, std::string("retrieval run: ") + e.what());
    }
}

}  // namespace pagegraph
