#include "pagegraph/datagen.hpp"

#include <algorithm>
#include <future>
#include <random>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "pagegraph/error.hpp"
#include "pagegraph/io.hpp"

namespace pagegraph {

namespace {

// Unbiased draw from [0, n).
std::size_t draw(std::mt19937_64& rng, std::size_t n) {
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

template <typename Fn>
auto with_retries(int max_retries, Fn&& fn) -> decltype(fn()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return fn();
        } catch (const std::exception&) {
            if (attempt >= max_retries) {
                throw;
            }
        }
    }
}

struct ItemOutcome {
    std::optional<Triplet> triplet;
    std::string failure;
};

ItemOutcome run_item(const GenItem& item, const GenOracle& generator, const LogicalOracle& scorer,
                     int max_retries) {
    GenResponse generated;
    try {
        generated = with_retries(max_retries, [&] {
            return generator.generate({item.image_ref, item.target_score, item.focus});
        });
    } catch (const std::exception& e) {
        return {std::nullopt, std::string("generation failed: ") + e.what()};
    }
    LogicalScore predicted(1);
    try {
        const OracleRequest request{"gen-" + std::to_string(item.index), generated.query,
                                    {"", item.image_index, item.image_ref}};
        predicted = with_retries(max_retries, [&] { return scorer.score(request); });
    } catch (const std::exception& e) {
        return {std::nullopt, std::string("scoring failed: ") + e.what()};
    }
    Triplet t{generated.query, item.image_ref, item.target_score, predicted.value(),
              within_tolerance(item.target_score, predicted.value()), generated.answer};
    return {std::move(t), {}};
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) {
        return value;
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<GenItem> sample_targets(const DatagenConfig& config) {
    if (config.image_pool.empty()) {
        throw Error(ErrorCode::EmptyPool, "image pool is empty");
    }
    if (config.n_samples < 1) {
        throw Error(ErrorCode::ValidationError, "n_samples must be >= 1");
    }
    std::mt19937_64 rng(config.seed);
    std::vector<GenItem> items;
    items.reserve(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i) {
        GenItem item;
        item.index = i;
        item.target_score = config.round_robin ? (i % 5) + 1 : static_cast<int>(draw(rng, 5)) + 1;
        item.image_index = static_cast<int>(draw(rng, config.image_pool.size()));
        item.image_ref = config.image_pool[static_cast<std::size_t>(item.image_index)];
        if (!config.focus_pool.empty()) {
            item.focus = config.focus_pool[draw(rng, config.focus_pool.size())];
        }
        items.push_back(std::move(item));
    }
    return items;
}

DatagenResult generate_and_check(std::span<const GenItem> items, const GenOracle& generator,
                                 const LogicalOracle& scorer, const DatagenOptions& options) {
    for (const auto& item : items) {
        if (item.target_score < 1 || item.target_score > 5) {
            throw Error(ErrorCode::ValidationError,
                        "target score out of range at item " + std::to_string(item.index));
        }
    }
    const std::size_t width = std::max(1u, options.concurrency);
    std::vector<ItemOutcome> outcomes(items.size());
    for (std::size_t start = 0; start < items.size(); start += width) {
        const std::size_t end = std::min(items.size(), start + width);
        if (width == 1) {
            outcomes[start] = run_item(items[start], generator, scorer, options.max_retries);
            continue;
        }
        std::vector<std::future<ItemOutcome>> pending;
        for (std::size_t i = start; i < end; ++i) {
            pending.push_back(std::async(std::launch::async, [&, i] {
                return run_item(items[i], generator, scorer, options.max_retries);
            }));
        }
        for (std::size_t i = start; i < end; ++i) {
            outcomes[i] = pending[i - start].get();
        }
    }

    DatagenResult result;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const GenItem& item = items[i];
        auto& counts = result.per_score[static_cast<std::size_t>(item.target_score - 1)];
        if (!outcomes[i].triplet) {
            spdlog::warn("datagen item {} ({}) excluded: {}", item.index, item.image_ref, outcomes[i].failure);
            result.failures.push_back({item.index, item.image_ref, outcomes[i].failure});
            ++counts.failed;
            continue;
        }
        ++counts.generated;
        if (outcomes[i].triplet->retained) {
            ++counts.retained;
        }
        result.triplets.push_back(std::move(*outcomes[i].triplet));
    }
    return result;
}

std::string encode_triplets_jsonl(std::span<const Triplet> triplets, bool retained_only) {
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& t : triplets) {
        if (retained_only && !t.retained) {
            continue;
        }
        nlohmann::ordered_json row;
        row["question"] = t.question;
        row["image_ref"] = t.image_ref;
        row["target_score"] = t.target_score;
        row["predicted_score"] = t.predicted_score;
        row["retained"] = t.retained;
        row["answer"] = t.answer;
        rows.push_back(std::move(row));
    }
    return io::to_jsonl(rows);
}

std::vector<Triplet> load_triplets(const std::filesystem::path& path) {
    std::vector<Triplet> out;
    for (const auto& row : io::read_jsonl(path)) {
        try {
            out.push_back({row.at("question").get<std::string>(), row.at("image_ref").get<std::string>(),
                           row.at("target_score").get<int>(), row.at("predicted_score").get<int>(),
                           row.at("retained").get<bool>(), row.at("answer").get<std::string>()});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
        }
        const auto& t = out.back();
        if (t.retained != within_tolerance(t.target_score, t.predicted_score)) {
            throw Error(ErrorCode::InvariantViolation,
                        path.string() + ": retained flag disagrees with |s - s'| <= 1");
        }
    }
    return out;
}

std::size_t export_triplets(std::span<const Triplet> triplets, const std::filesystem::path& path,
                            bool retained_only) {
    io::write_file_atomic(path, encode_triplets_jsonl(triplets, retained_only));
    if (!retained_only) {
        return triplets.size();
    }
    return static_cast<std::size_t>(
        std::count_if(triplets.begin(), triplets.end(), [](const Triplet& t) { return t.retained; }));
}

std::string encode_review_csv(std::span<const Triplet> triplets) {
    std::string out = "question,image_ref,target_score,predicted_score,answer\n";
    for (const auto& t : triplets) {
        out += csv_field(t.question) + ',' + csv_field(t.image_ref) + ',' +
               std::to_string(t.target_score) + ',' + std::to_string(t.predicted_score) + ',' +
               csv_field(t.answer) + '\n';
    }
    return out;
}

}  // namespace pagegraph
