#pragma once

#include <ostream>

#include "pagegraph/config.hpp"

namespace pagegraph {

// Each command writes its artifacts under config.out (atomically), prints a
// short human summary to `out` and returns the process exit code. Hard
// failures are thrown as Error.

/// Builds the page graph and writes it to --graph (default <out>/graph.json).
int run_index(const RunConfig& config, std::ostream& out);

/// One run JSON per query in <out>/runs plus <out>/telemetry.json. A query
/// whose oracle fails leaves <query>.aborted.json and makes the exit code 1.
int run_retrieve(const RunConfig& config, std::ostream& out);

/// Scores the runs in runs_dir() against --dataset; writes report.json and
/// report.txt.
int run_eval(const RunConfig& config, std::ostream& out);

/// Queried-page fractions across runs_dir(); writes stats.json.
int run_stats(const RunConfig& config, std::ostream& out);

/// Writes triplets.jsonl, retained.jsonl, review.csv and datagen_summary.json.
int run_datagen(const RunConfig& config, std::ostream& out);

/// Synthetic corpus from a JSON spec (--spec) into <out>.
int run_synth(const RunConfig& config, std::ostream& out);

}  // namespace pagegraph
