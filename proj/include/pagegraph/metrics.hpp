#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "pagegraph/retrieval.hpp"

namespace pagegraph {

struct EvalSample {
    std::string query_id;
    std::string doc_id;
    std::string question;
    std::set<int> evidence_pages;
    std::optional<std::string> answer;

    bool operator==(const EvalSample&) const = default;
};

// NDCG normalization. Truncated sums both DCG and IDCG over positions
// 1..min(n, K) (n = |ground truth|); Standard sums DCG over 1..K.
enum class NdcgVariant { Truncated, Standard };

// All @K metrics treat `retrieved` as ranked; only its first K entries count
// and a shorter list is scored over what is there. Duplicate ids raise
// DuplicateRetrieved, an empty ground truth raises EmptyGroundTruth.
double recall_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k);
double precision_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k);
double ndcg_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k,
                 NdcgVariant variant = NdcgVariant::Truncated);
double mrr_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k);

struct MetricValues {
    double recall = 0.0;
    double precision = 0.0;
    double ndcg = 0.0;
    double mrr = 0.0;
};

struct SampleMetrics {
    std::string query_id;
    std::map<int, MetricValues> by_k;
};

struct MetricReport {
    NdcgVariant variant = NdcgVariant::Truncated;
    std::vector<int> ks;
    std::vector<SampleMetrics> samples;  // same order as the input samples
    std::map<int, MetricValues> mean;

    std::size_t sample_count() const noexcept { return samples.size(); }
};

/// Joins samples to runs on query_id (a sample without a run raises
/// MissingRun), scores topk(run, K) for every K and averages over samples.
MetricReport evaluate(std::span<const RetrievalRun> runs, std::span<const EvalSample> samples,
                      std::span<const int> ks, NdcgVariant variant = NdcgVariant::Truncated);

std::vector<EvalSample> load_eval_dataset(const std::filesystem::path& path);
std::string encode_eval_jsonl(std::span<const EvalSample> samples);
/// Raises PageOutOfRange if any evidence page is outside [0, n_pages).
void check_evidence_range(std::span<const EvalSample> samples, int n_pages);

std::string encode_report_json(const MetricReport& report);
std::string format_report_table(const MetricReport& report);

}  // namespace pagegraph
