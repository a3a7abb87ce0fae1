#include "pagegraph/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pagegraph/datagen.hpp"
#include "pagegraph/error.hpp"
#include "pagegraph/fixtures.hpp"
#include "pagegraph/graph.hpp"
#include "pagegraph/io.hpp"
#include "pagegraph/metrics.hpp"

namespace pagegraph {

namespace fs = std::filesystem;

namespace {

void require(const fs::path& path, const char* flag) {
    if (path.empty()) {
        throw Error(ErrorCode::ConfigError, std::string(flag) + " is required");
    }
}

std::string sanitize(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        if (!ok) {
            c = '_';
        }
    }
    if (out.empty() || out == "." || out == "..") {
        out = "_" + out;
    }
    return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::vector<std::string> lines;
    std::string text = io::read_file(path);
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            lines.push_back(std::move(line));
        }
        start = end + 1;
    }
    return lines;
}

PageGraph graph_for(const RunConfig& config, const EmbeddingStore& store) {
    if (!config.graph.empty() && fs::exists(config.graph)) {
        PageGraph graph = load_graph(config.graph);
        if (graph.n_pages() != static_cast<int>(store.size())) {
            throw Error(ErrorCode::DimensionMismatch, "graph " + config.graph.string() + " has " +
                                                          std::to_string(graph.n_pages()) + " pages, store has " +
                                                          std::to_string(store.size()));
        }
        return graph;
    }
    return build_graph(store, config.theta);
}

// Runs in a directory, by file name; aborted partial runs are skipped.
std::vector<RetrievalRun> load_runs(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "run directory " + dir.string() + " does not exist");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            name.find(".aborted.") == std::string::npos && name.rfind(".tmp.", 0) != 0) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<RetrievalRun> runs;
    for (const auto& f : files) {
        try {
            runs.push_back(decode_run_json(io::read_file(f)));
        } catch (const Error& e) {
            throw Error(e.code(), f.string() + ": " + e.what());
        }
    }
    return runs;
}

double percentile(const std::vector<double>& sorted, double q) {
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    return sorted[std::max<std::size_t>(rank, 1) - 1];
}

}  // namespace

int run_index(const RunConfig& config, std::ostream& out) {
    require(config.embeddings, "--embeddings");
    const EmbeddingStore store = load_store(config.embeddings);
    const PageGraph graph = build_graph(store, config.theta);
    const fs::path target = config.graph.empty() ? config.out / "graph.json" : config.graph;
    save_graph(graph, target);
    out << store.doc_id << ": " << store.size() << " pages, " << graph.edges().size()
        << " edges (theta=" << config.theta << ", max degree " << graph.max_degree() << ") -> "
        << target.string() << "\n";
    return 0;
}

int run_retrieve(const RunConfig& config, std::ostream& out) {
    require(config.embeddings, "--embeddings");
    require(config.queries, "--queries");
    const TraversalConfig tc = config.traversal();
    const EmbeddingStore store = load_store(config.embeddings);
    const auto queries = load_queries(config.queries);
    const PageGraph graph = graph_for(config, store);

    std::map<std::string, std::string> questions;
    if (!config.dataset.empty()) {
        for (const auto& s : load_eval_dataset(config.dataset)) {
            questions[s.query_id] = s.question;
        }
    }

    std::unique_ptr<LogicalOracle> oracle;
    if (tc.mode != Mode::SemanticOnly) {
        oracle = make_oracle(resolve_oracle_spec(config.oracle));
    }

    std::set<std::string> names;
    for (const auto& q : queries) {
        if (!names.insert(sanitize(q.query_id)).second) {
            throw Error(ErrorCode::ValidationError, "query ids collide after sanitizing: " + q.query_id);
        }
    }

    const fs::path runs_dir = config.out / "runs";
    fs::create_directories(runs_dir);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    double fraction_sum = 0.0;
    int completed = 0;
    int aborted = 0;
    const double n = static_cast<double>(store.size());

    for (const auto& q : queries) {
        const auto it = questions.find(q.query_id);
        const std::string text = it == questions.end() ? std::string{} : it->second;
        const std::string name = sanitize(q.query_id);
        nlohmann::ordered_json row;
        row["query_id"] = q.query_id;
        try {
            const RetrievalRun run = traverse(q, text, store, graph, oracle.get(), tc);
            io::write_file_atomic(runs_dir / (name + ".json"), encode_run_json(run));
            row["queried_pages"] = run.queried_pages;
            row["fraction"] = run.queried_pages / n;
            row["hops_used"] = run.hops_used;
            fraction_sum += run.queried_pages / n;
            ++completed;
        } catch (const TraversalAborted& e) {
            spdlog::error("query {} aborted: {}", q.query_id, e.what());
            io::write_file_atomic(runs_dir / (name + ".aborted.json"), encode_run_json(e.partial()));
            row["aborted"] = std::string(to_string(e.code()));
            row["queried_pages"] = e.partial().queried_pages;
            ++aborted;
        }
        rows.push_back(std::move(row));
    }

    nlohmann::ordered_json telemetry;
    telemetry["doc_id"] = store.doc_id;
    telemetry["n_pages"] = store.size();
    telemetry["mode"] = std::string(to_string(tc.mode));
    telemetry["theta"] = graph.theta();
    telemetry["w"] = tc.w;
    telemetry["n_hop"] = tc.n_hop;
    telemetry["combine_weight"] = tc.combine_weight;
    telemetry["edges"] = graph.edges().size();
    telemetry["queries"] = std::move(rows);
    telemetry["completed"] = completed;
    telemetry["aborted"] = aborted;
    telemetry["mean_fraction"] = completed > 0 ? fraction_sum / completed : 0.0;
    io::write_file_atomic(config.out / "telemetry.json", telemetry.dump(2) + "\n");

    out << completed << " queries retrieved (" << to_string(tc.mode) << "), mean queried fraction "
        << (completed > 0 ? fraction_sum / completed : 0.0) << "\n";
    if (aborted > 0) {
        out << aborted << " queries aborted\n";
        return 1;
    }
    return 0;
}

int run_eval(const RunConfig& config, std::ostream& out) {
    require(config.dataset, "--dataset");
    const auto samples = load_eval_dataset(config.dataset);
    const auto runs = load_runs(config.runs_dir());
    for (const auto& run : runs) {
        for (const auto& s : samples) {
            if (s.query_id == run.query_id) {
                check_evidence_range(std::span(&s, 1), run.n_pages);
            }
        }
    }
    const MetricReport report = evaluate(runs, samples, config.topk,
                                         config.ndcg_standard ? NdcgVariant::Standard : NdcgVariant::Truncated);
    const std::string table = format_report_table(report);
    io::write_file_atomic(config.out / "report.json", encode_report_json(report));
    io::write_file_atomic(config.out / "report.txt", table);
    out << table;
    return 0;
}

int run_stats(const RunConfig& config, std::ostream& out) {
    const auto runs = load_runs(config.runs_dir());
    if (runs.empty()) {
        throw Error(ErrorCode::ValidationError, "no runs in " + config.runs_dir().string());
    }
    std::vector<double> fractions;
    double queried = 0.0;
    for (const auto& run : runs) {
        fractions.push_back(static_cast<double>(run.queried_pages) / run.n_pages);
        queried += run.queried_pages;
    }
    std::vector<double> sorted = fractions;
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double f : fractions) {
        sum += f;
    }

    nlohmann::ordered_json doc;
    doc["runs"] = runs.size();
    doc["mean_queried_pages"] = queried / static_cast<double>(runs.size());
    nlohmann::ordered_json frac;
    frac["mean"] = sum / static_cast<double>(runs.size());
    frac["p50"] = percentile(sorted, 0.50);
    frac["p90"] = percentile(sorted, 0.90);
    frac["p99"] = percentile(sorted, 0.99);
    frac["min"] = sorted.front();
    frac["max"] = sorted.back();
    doc["queried_fraction"] = frac;
    io::write_file_atomic(config.out / "stats.json", doc.dump(2) + "\n");
    out << runs.size() << " runs, queried fraction mean " << frac["mean"].get<double>() << " p50 "
        << frac["p50"].get<double>() << " p90 " << frac["p90"].get<double>() << " max "
        << frac["max"].get<double>() << "\n";
    return 0;
}

int run_datagen(const RunConfig& config, std::ostream& out) {
    DatagenConfig dc;
    dc.n_samples = config.n_samples;
    dc.seed = config.seed;
    dc.round_robin = config.round_robin;
    if (!config.images.empty()) {
        dc.image_pool = read_lines(config.images);
    } else {
        require(config.embeddings, "--images or --embeddings");
        const EmbeddingStore store = load_store(config.embeddings);
        for (const auto& p : store.pages) {
            dc.image_pool.push_back(page_image_ref(store.doc_id, p.page_id));
        }
    }
    if (!config.focus.empty()) {
        for (auto& f : read_lines(config.focus)) {
            dc.focus_pool.emplace_back(std::move(f));
        }
    }

    const std::string score_spec = resolve_oracle_spec(config.oracle);
    std::string gen_spec = config.gen_oracle;
    if (gen_spec.empty() && score_spec.rfind("mock:", 0) != 0) {
        gen_spec = score_spec;  // one sidecar serves both endpoints
    }
    const auto scorer = make_oracle(score_spec);
    const auto generator = make_gen_oracle(gen_spec);

    const auto items = sample_targets(dc);
    DatagenOptions opts;
    opts.concurrency = std::max(1u, config.concurrency);
    const DatagenResult result = generate_and_check(items, *generator, *scorer, opts);

    const std::size_t all = export_triplets(result.triplets, config.out / "triplets.jsonl", false);
    const std::size_t kept = export_triplets(result.triplets, config.out / "retained.jsonl", true);
    io::write_file_atomic(config.out / "review.csv", encode_review_csv(result.triplets));

    nlohmann::ordered_json summary;
    summary["n_samples"] = dc.n_samples;
    summary["seed"] = dc.seed;
    summary["generated"] = all;
    summary["retained"] = kept;
    summary["failed"] = result.failures.size();
    nlohmann::ordered_json per_score;
    for (int s = 1; s <= 5; ++s) {
        const auto& c = result.per_score[static_cast<std::size_t>(s - 1)];
        per_score[std::to_string(s)] = {{"generated", c.generated}, {"retained", c.retained}, {"failed", c.failed}};
    }
    summary["per_score"] = std::move(per_score);
    auto failures = nlohmann::ordered_json::array();
    for (const auto& f : result.failures) {
        failures.push_back({{"index", f.index}, {"image_ref", f.image_ref}, {"reason", f.reason}});
    }
    summary["failures"] = std::move(failures);
    io::write_file_atomic(config.out / "datagen_summary.json", summary.dump(2) + "\n");

    out << all << " generated, " << kept << " retained, " << result.failures.size() << " failed\n";
    return result.failures.empty() ? 0 : 1;
}

int run_synth(const RunConfig& config, std::ostream& out) {
    require(config.synth_spec, "--spec");
    SyntheticSpec spec = parse_synthetic_spec(io::read_file(config.synth_spec));
    const SyntheticCorpus corpus = synth(spec);
    write_corpus(corpus, config.out);
    out << spec.doc_id << ": " << corpus.store.size() << " pages, " << corpus.edges.size() << " edges, "
        << corpus.queries.size() << " queries -> " << config.out.string() << "\n";
    return 0;
}

}  // namespace pagegraph
