#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "pagegraph/commands.hpp"
#include "pagegraph/datagen.hpp"
#include "pagegraph/error.hpp"
#include "pagegraph/fixtures.hpp"
#include "pagegraph/io.hpp"
#include "support.hpp"

using namespace pagegraph;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(io::read_file(p)); }

// Path graph 0..9 realized geometrically, one query peaked at page 4.
struct PathCorpus {
    TempDir dir;
    RunConfig config;

    explicit PathCorpus(int evidence = 6) {
        SyntheticSpec spec;
        spec.doc_id = "path";
        spec.n_pages = 10;
        spec.d = 16;
        spec.queries.push_back({"q/1", "Where is the total?", {evidence}, {4}, {}});
        write_corpus(synth(spec), dir.path / "corpus");
        config.embeddings = dir.path / "corpus" / "path.mve";
        config.queries = dir.path / "corpus" / "queries.json";
        config.dataset = dir.path / "corpus" / "eval.jsonl";
        config.oracle = "mock:" + (dir.path / "corpus" / "fixture.jsonl").string();
        config.out = dir.path / "out";
    }
};

int run_cli(const std::string& args) {
    const int status = std::system((std::string(PAGEGRAPH_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Index, OrthogonalAndClones) {
    TempDir tmp;
    save_store(make_store({{{1, 0, 0}}, {{0, 1, 0}}, {{0, 0, 1}}}, "orth"), tmp.path / "orth.mve",
               EmbeddingFormat::Binary);
    RunConfig c;
    c.embeddings = tmp.path / "orth.mve";
    c.out = tmp.path / "o";
    std::ostringstream out;
    EXPECT_EQ(run_index(c, out), 0);
    EXPECT_NE(out.str().find(" 0 edges"), std::string::npos) << out.str();
    EXPECT_TRUE(load_graph(tmp.path / "o" / "graph.json").edges().empty());

    save_store(make_store(std::vector<Rows>(4, Rows{{1, 1, 0}}), "clones"), tmp.path / "c.json", EmbeddingFormat::Json);
    c.embeddings = tmp.path / "c.json";
    c.graph = tmp.path / "c.graph.json";
    EXPECT_EQ(run_index(c, out), 0);
    EXPECT_EQ(load_graph(c.graph).edges().size(), 6u);
}

TEST(Index, RandomEdgeCountMatchesPairOracle) {
    TempDir tmp;
    std::mt19937_64 rng(14);
    const auto store = random_store(rng, 20, 3, 3);
    save_store(store, tmp.path / "doc.mve", EmbeddingFormat::Binary);
    RunConfig c;
    c.embeddings = tmp.path / "doc.mve";
    c.out = tmp.path;
    std::ostringstream out;
    run_index(c, out);
    EXPECT_EQ(load_graph(tmp.path / "graph.json").edges().size(), ref_edges(store, 0.4).size());
}

TEST(Retrieve, PathFixtureMatchesHandTrace) {
    PathCorpus corpus;
    corpus.config.w = 1;
    std::ostringstream out;
    ASSERT_EQ(run_retrieve(corpus.config, out), 0);
    const auto run = decode_run_json(io::read_file(corpus.config.out / "runs" / "q_1.json"));
    EXPECT_EQ(run.visited.at(0).page_id, 6);
    EXPECT_EQ(run.visited.at(0).hop_discovered, 2);
    EXPECT_EQ(run.frontiers, (std::vector<std::vector<int>>{{4}, {5}, {6}, {7}, {8}}));
    const auto tel = read_json(corpus.config.out / "telemetry.json");
    EXPECT_EQ(tel["queries"][0]["queried_pages"], 6);
    EXPECT_DOUBLE_EQ(tel["queries"][0]["fraction"].get<double>(), 0.6);
}

TEST(Retrieve, IsolatedAndFullFractions) {
    PathCorpus corpus;
    // A graph file with no edges forces the isolated case.
    save_graph(PageGraph("path", 10, 0.4, {}), corpus.dir.path / "empty.json");
    corpus.config.graph = corpus.dir.path / "empty.json";
    std::ostringstream out;
    run_retrieve(corpus.config, out);
    EXPECT_DOUBLE_EQ(read_json(corpus.config.out / "telemetry.json")["mean_fraction"].get<double>(), 0.3);

    corpus.config.mode = Mode::Full;
    run_retrieve(corpus.config, out);
    EXPECT_DOUBLE_EQ(read_json(corpus.config.out / "telemetry.json")["mean_fraction"].get<double>(), 1.0);
}

TEST(Retrieve, MissingFixtureAbortsWithPartialFile) {
    PathCorpus corpus;
    io::write_file_atomic(corpus.dir.path / "partial.jsonl", R"({"query_id":"q/1","page_id":4,"score":2})" "\n");
    corpus.config.oracle = "mock:" + (corpus.dir.path / "partial.jsonl").string();
    std::ostringstream out;
    EXPECT_EQ(run_retrieve(corpus.config, out), 1);
    const auto partial = decode_run_json(io::read_file(corpus.config.out / "runs" / "q_1.aborted.json"));
    EXPECT_EQ(partial.queried_pages, 1);
}

TEST(Retrieve, ByteIdenticalReruns) {
    PathCorpus a, b;
    a.config.concurrency = 1;
    b.config.concurrency = 4;
    b.config.out = a.dir.path / "out2";
    b.config.embeddings = a.config.embeddings;
    b.config.queries = a.config.queries;
    b.config.dataset = a.config.dataset;
    b.config.oracle = a.config.oracle;
    std::ostringstream out;
    run_retrieve(a.config, out);
    run_retrieve(b.config, out);
    for (const char* f : {"runs/q_1.json", "telemetry.json"}) {
        EXPECT_EQ(io::read_file(a.config.out / f), io::read_file(b.config.out / f)) << f;
    }
}

TEST(Eval, PerfectAndAdversarial) {
    PathCorpus good;
    std::ostringstream out;
    run_retrieve(good.config, out);
    ASSERT_EQ(run_eval(good.config, out), 0);
    auto report = read_json(good.config.out / "report.json");
    EXPECT_DOUBLE_EQ(report["mean"]["3"]["recall"].get<double>(), 1.0);
    EXPECT_TRUE(fs::exists(good.config.out / "report.txt"));

    // Evidence on page 0 while retrieval is pinned to the peak's initial set.
    PathCorpus bad(0);
    bad.config.mode = Mode::SemanticOnly;
    bad.config.topk = {1};
    run_retrieve(bad.config, out);
    run_eval(bad.config, out);
    report = read_json(bad.config.out / "report.json");
    EXPECT_DOUBLE_EQ(report["mean"]["1"]["recall"].get<double>(), 0.0);
}

TEST(Stats, FractionsAndPercentiles) {
    TempDir tmp;
    RunConfig c;
    c.out = tmp.path;
    auto write_run = [&](const std::string& id, int queried, int n) {
        RetrievalRun r;
        r.query_id = id;
        r.n_pages = n;
        r.queried_pages = queried;
        r.semantic_order.resize(n);
        std::iota(r.semantic_order.begin(), r.semantic_order.end(), 0);
        io::write_file_atomic(tmp.path / "runs" / (id + ".json"), encode_run_json(r));
    };
    std::ostringstream out;
    write_run("a", 2, 10);
    run_stats(c, out);
    EXPECT_DOUBLE_EQ(read_json(tmp.path / "stats.json")["queried_fraction"]["mean"].get<double>(), 0.2);
    write_run("b", 4, 10);
    run_stats(c, out);
    EXPECT_DOUBLE_EQ(read_json(tmp.path / "stats.json")["queried_fraction"]["mean"].get<double>(), 0.3);

    std::mt19937_64 rng(1);
    std::vector<double> fr{0.2, 0.4};
    for (int i = 0; i < 48; ++i) {
        const int n = 5 + static_cast<int>(rng() % 40), q = static_cast<int>(rng() % (n + 1));
        write_run("r" + std::to_string(i), q, n);
        fr.push_back(static_cast<double>(q) / n);
    }
    run_stats(c, out);
    const auto stats = read_json(tmp.path / "stats.json");
    double sum = 0;
    for (double f : fr) sum += f;
    std::sort(fr.begin(), fr.end());
    EXPECT_NEAR(stats["queried_fraction"]["mean"].get<double>(), sum / 50, 1e-12);
    EXPECT_DOUBLE_EQ(stats["queried_fraction"]["p50"].get<double>(), fr[24]);
    EXPECT_DOUBLE_EQ(stats["queried_fraction"]["p90"].get<double>(), fr[44]);
    EXPECT_DOUBLE_EQ(stats["queried_fraction"]["max"].get<double>(), fr.back());
    EXPECT_EQ(stats["runs"], 50);
}

TEST(Datagen, MockPipelineWritesArtifacts) {
    TempDir tmp;
    std::vector<std::string> images{"doc/0", "doc/1", "doc/2"};
    std::string gen, score;
    for (const auto& img : images)
        for (int s = 1; s <= 5; ++s) {
            nlohmann::ordered_json row{{"image_ref", img}, {"target_score", s},
                                       {"query", "Q " + img + " " + std::to_string(s)}, {"relevance_score", s},
                                       {"answer", "A"}};
            gen += row.dump() + "\n";
        }
    for (int i = 0; i < 20; ++i) {
        nlohmann::ordered_json row{{"query_id", "gen-" + std::to_string(i)}, {"page_id", i % 3}, {"score", 1 + i % 5}};
        score += row.dump() + "\n";
    }
    io::write_file_atomic(tmp.path / "gen.jsonl", gen);
    io::write_file_atomic(tmp.path / "score.jsonl", score);
    io::write_file_atomic(tmp.path / "images.txt", "doc/0\ndoc/1\ndoc/2\n");
    RunConfig c;
    c.images = tmp.path / "images.txt";
    c.gen_oracle = "mock:" + (tmp.path / "gen.jsonl").string();
    c.oracle = "mock:" + (tmp.path / "score.jsonl").string();
    c.n_samples = 20;
    c.seed = 5;
    c.out = tmp.path / "out";
    std::ostringstream out;
    const int rc = run_datagen(c, out);
    const auto summary = read_json(c.out / "datagen_summary.json");
    // Items whose (gen-i, image index) is not in the table are reported as failures.
    EXPECT_EQ(summary["generated"].get<int>() + summary["failed"].get<int>(), 20);
    EXPECT_EQ(rc, summary["failed"].get<int>() == 0 ? 0 : 1);
    for (const auto& t : load_triplets(c.out / "triplets.jsonl")) EXPECT_EQ(t.retained, within_tolerance(t.target_score, t.predicted_score));
    EXPECT_TRUE(fs::exists(c.out / "review.csv"));

    RunConfig again = c;
    again.out = tmp.path / "out2";
    run_datagen(again, out);
    for (const char* f : {"triplets.jsonl", "retained.jsonl", "review.csv", "datagen_summary.json"})
        EXPECT_EQ(io::read_file(c.out / f), io::read_file(again.out / f)) << f;
}

TEST(Config, OracleResolution) {
    ::unsetenv(kOracleUrlEnv);
    EXPECT_EQ(resolve_oracle_spec(""), "");
    EXPECT_EQ(resolve_oracle_spec("mock:x"), "mock:x");
    ::setenv(kOracleUrlEnv, "http://127.0.0.1:9", 1);
    EXPECT_EQ(resolve_oracle_spec(""), "http://127.0.0.1:9");
    ::setenv(kOracleUrlEnv, "127.0.0.1:9", 1);
    EXPECT_EQ(resolve_oracle_spec(""), "http:http://127.0.0.1:9");
    EXPECT_EQ(resolve_oracle_spec("mock:y"), "mock:y");
    ::unsetenv(kOracleUrlEnv);
    EXPECT_THROW(make_oracle(""), Error);
    EXPECT_THROW(make_oracle("ftp:x"), Error);
}

TEST(Cli, ExitCodesAndConfigFile) {
    PathCorpus corpus;
    const std::string base = "--embeddings " + corpus.config.embeddings.string() + " --queries " +
                             corpus.config.queries.string() + " --oracle " + corpus.config.oracle;
    const fs::path out = corpus.dir.path / "cli";
    EXPECT_EQ(run_cli("retrieve " + base + " --out " + out.string()), 0);
    EXPECT_EQ(run_cli("eval --dataset " + corpus.config.dataset.string() + " --out " + out.string()), 0);
    EXPECT_EQ(run_cli("stats --out " + out.string()), 0);
    EXPECT_EQ(run_cli("retrieve --embeddings /nonexistent.mve --queries x --out " + out.string()), 1);
    EXPECT_EQ(run_cli("retrieve " + base + " --mode bogus --out " + out.string()), 1);
    EXPECT_NE(run_cli("nosuchcommand"), 0);

    // Flags win over the config file.
    io::write_file_atomic(corpus.dir.path / "run.toml", "w = 1\ncombine-weight = 0.25\nhops = 2\n");
    EXPECT_EQ(run_cli("retrieve --config " + (corpus.dir.path / "run.toml").string() + " --w 2 " + base +
                      " --out " + out.string()),
              0);
    const auto tel = read_json(out / "telemetry.json");
    EXPECT_EQ(tel["w"], 2);
    EXPECT_EQ(tel["n_hop"], 2);
    EXPECT_DOUBLE_EQ(tel["combine_weight"].get<double>(), 0.25);

    io::write_file_atomic(corpus.dir.path / "bad.toml", "combine_weight = 0.3\n");
    EXPECT_NE(run_cli("retrieve --config " + (corpus.dir.path / "bad.toml").string() + " " + base), 0);
}
