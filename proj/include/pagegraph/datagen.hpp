#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pagegraph/oracle.hpp"

namespace pagegraph {

/// Training-data target: which image to write about, at what relevance.
struct GenItem {
    int index = 0;        // position in the sampled sequence
    int image_index = 0;  // position in the image pool
    std::string image_ref;
    int target_score = 0;
    std::optional<std::string> focus;

    bool operator==(const GenItem&) const = default;
};

struct DatagenConfig {
    int n_samples = 0;
    std::uint64_t seed = 0;
    std::vector<std::optional<std::string>> focus_pool;  // empty: no focus
    std::vector<std::string> image_pool;
    bool round_robin = false;  // cycle scores 1..5 instead of drawing them
};

/// Draws target scores uniformly from 1..5 and images (and focuses, when a
/// pool is given) uniformly from their pools. Reproducible for a fixed seed.
std::vector<GenItem> sample_targets(const DatagenConfig& config);

/// Quality gate for a generated sample.
constexpr bool within_tolerance(int target, int predicted) {
    return (target > predicted ? target - predicted : predicted - target) <= 1;
}

struct Triplet {
    std::string question;
    std::string image_ref;
    int target_score = 0;
    int predicted_score = 0;
    bool retained = false;  // == within_tolerance(target_score, predicted_score)
    std::string answer;

    bool operator==(const Triplet&) const = default;
};

struct DatagenFailure {
    int index = 0;
    std::string image_ref;
    std::string reason;
};

struct ScoreCounts {
    int generated = 0;
    int retained = 0;
    int failed = 0;
};

struct DatagenResult {
    std::vector<Triplet> triplets;  // input order, failed items omitted
    std::vector<DatagenFailure> failures;
    std::array<ScoreCounts, 5> per_score{};  // indexed by target_score - 1
};

struct DatagenOptions {
    int max_retries = 2;
    unsigned concurrency = 1;
};

/// Generates a question per item, asks `scorer` to grade it against the same
/// image and flags the pair retained iff the grade is within 1 of the target.
/// Oracle failures (after retries) drop the item and are reported, never
/// retained.
DatagenResult generate_and_check(std::span<const GenItem> items, const GenOracle& generator,
                                 const LogicalOracle& scorer, const DatagenOptions& options = {});

std::string encode_triplets_jsonl(std::span<const Triplet> triplets, bool retained_only);
std::vector<Triplet> load_triplets(const std::filesystem::path& path);
/// Writes JSONL and returns the number of rows written.
std::size_t export_triplets(std::span<const Triplet> triplets, const std::filesystem::path& path,
                            bool retained_only);

/// CSV for manual review: question,image_ref,target_score,predicted_score,answer.
std::string encode_review_csv(std::span<const Triplet> triplets);

}  // namespace pagegraph
