#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pagegraph/commands.hpp"
#include "pagegraph/error.hpp"
#include "pagegraph/prompts.hpp"

int main(int argc, char** argv) {
    using namespace pagegraph;
    spdlog::set_default_logger(spdlog::stderr_color_mt("pagegraph"));
    spdlog::set_pattern("%^%l%$: %v");

    CLI::App app{"Graph-based page retrieval for long documents"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value config file; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    RunConfig cfg;
    std::string mode = "molorag";
    bool verbose = false;
    std::string question;
    std::optional<int> target_score;
    std::optional<std::string> focus_text;

    app.add_option("--embeddings", cfg.embeddings, "page embeddings (MVE1 or JSON)");
    app.add_option("--queries", cfg.queries, "query embeddings (MVE1 or JSON)");
    app.add_option("--graph", cfg.graph, "page graph JSON (index writes it, retrieve reads it)");
    app.add_option("--dataset", cfg.dataset, "eval JSONL (query_id, question, evidence_pages)");
    app.add_option("--runs", cfg.runs, "run directory for eval/stats (default <out>/runs)");
    app.add_option("--out", cfg.out, "output directory")->capture_default_str();
    app.add_option("--theta", cfg.theta, "edge threshold")->capture_default_str();
    app.add_option("--w", cfg.w, "exploration set size")->capture_default_str();
    app.add_option("--hops", cfg.n_hop, "maximum hops")->capture_default_str();
    app.add_option("--topk", cfg.topk, "K values, comma separated")->delimiter(',')->capture_default_str();
    app.add_option("--mode", mode, "molorag | logi_only | full | semantic_only")->capture_default_str();
    app.add_option("--oracle", cfg.oracle, "mock:<fixture.jsonl> | http:<url>");
    app.add_option("--combine-weight", cfg.combine_weight, "weight on the semantic score")->capture_default_str();
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_flag("--ndcg-standard", cfg.ndcg_standard, "report conventional NDCG");
    app.add_option("--concurrency", cfg.concurrency, "oracle calls in flight")->capture_default_str();
    app.add_option("--gen-oracle", cfg.gen_oracle, "generation oracle, mock:<path> | http:<url>");
    app.add_option("--images", cfg.images, "image refs, one per line");
    app.add_option("--focus", cfg.focus, "focus hints, one per line");
    app.add_option("--n", cfg.n_samples, "samples to generate")->capture_default_str();
    app.add_flag("--round-robin", cfg.round_robin, "cycle target scores 1..5");
    app.add_option("--spec", cfg.synth_spec, "synthetic corpus spec (JSON)");
    app.add_flag("-v,--verbose", verbose, "debug logging");

    auto* index = app.add_subcommand("index", "build the page graph");
    auto* retrieve = app.add_subcommand("retrieve", "rank pages for each query");
    auto* eval = app.add_subcommand("eval", "score runs against a dataset");
    auto* stats = app.add_subcommand("stats", "queried-page statistics over runs");
    auto* datagen = app.add_subcommand("datagen", "generate and filter training triplets");
    auto* synth_cmd = app.add_subcommand("synth", "write a synthetic corpus");
    auto* prompt = app.add_subcommand("prompt", "print a rendered prompt");
    prompt->add_option("--question", question, "render the scoring prompt");
    prompt->add_option("--target-score", target_score, "render the generation prompt");
    prompt->add_option("--focus-text", focus_text, "focus for the generation prompt");

    CLI11_PARSE(app, argc, argv);
    if (verbose) {
        spdlog::set_level(spdlog::level::debug);
    }

    try {
        cfg.mode = parse_mode(mode);
        if (*index) return run_index(cfg, std::cout);
        if (*retrieve) return run_retrieve(cfg, std::cout);
        if (*eval) return run_eval(cfg, std::cout);
        if (*stats) return run_stats(cfg, std::cout);
        if (*datagen) return run_datagen(cfg, std::cout);
        if (*synth_cmd) return run_synth(cfg, std::cout);
        if (*prompt) {
            if (target_score) {
                std::cout << render_generation_prompt(*target_score, focus_text);
            } else {
                std::cout << render_scoring_prompt(question);
            }
            return 0;
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
