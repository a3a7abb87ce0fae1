#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pagegraph/oracle.hpp"
#include "pagegraph/retrieval.hpp"

namespace pagegraph {

inline constexpr const char* kOracleUrlEnv = "MOLORAG_ORACLE_URL";

struct RunConfig {
    std::filesystem::path embeddings;
    std::filesystem::path queries;
    std::filesystem::path graph;
    std::filesystem::path dataset;
    std::filesystem::path runs;  // eval/stats input; defaults to <out>/runs
    std::filesystem::path out = "out";

    double theta = 0.4;
    int w = 3;
    int n_hop = 4;
    std::vector<int> topk{1, 3, 5};
    Mode mode = Mode::Graph;
    std::string oracle;  // "mock:<path>" | "http:<url>"; empty: environment default
    double combine_weight = 0.5;
    std::uint64_t seed = 0;
    bool ndcg_standard = false;
    unsigned concurrency = 1;

    // datagen
    std::string gen_oracle;
    std::filesystem::path images;  // one image ref per line; default: pages of --embeddings
    std::filesystem::path focus;   // one focus per line
    int n_samples = 100;
    bool round_robin = false;

    // synth
    std::filesystem::path synth_spec;

    TraversalConfig traversal() const;
    std::filesystem::path runs_dir() const { return runs.empty() ? out / "runs" : runs; }
};

/// The oracle spec actually in force: the flag if set, else the environment
/// URL (as "http:<url>"), else empty.
std::string resolve_oracle_spec(const std::string& flag);

/// Builds an oracle from "mock:<fixture.jsonl>" or "http:<url>". A bare
/// http:// URL is accepted as well.
std::unique_ptr<LogicalOracle> make_oracle(const std::string& spec, HttpOptions http = {});
std::unique_ptr<GenOracle> make_gen_oracle(const std::string& spec, HttpOptions http = {});

}  // namespace pagegraph
