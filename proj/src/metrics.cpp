#include "pagegraph/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "pagegraph/error.hpp"
#include "pagegraph/io.hpp"

namespace pagegraph {

namespace {

// Prefix of `retrieved` that counts at cutoff k, after argument checks.
std::span<const int> checked_prefix(std::span<const int> retrieved, const std::set<int>& gt, int k) {
    if (gt.empty()) {
        throw Error(ErrorCode::EmptyGroundTruth, "ground-truth page set is empty");
    }
    if (k < 1) {
        throw Error(ErrorCode::ValidationError, "K must be >= 1");
    }
    std::unordered_set<int> seen;
    for (int id : retrieved) {
        if (!seen.insert(id).second) {
            throw Error(ErrorCode::DuplicateRetrieved, "page " + std::to_string(id) + " retrieved twice");
        }
    }
    return retrieved.first(std::min(retrieved.size(), static_cast<std::size_t>(k)));
}

std::size_t hits(std::span<const int> prefix, const std::set<int>& gt) {
    return static_cast<std::size_t>(
        std::count_if(prefix.begin(), prefix.end(), [&](int id) { return gt.count(id) > 0; }));
}

double discount(std::size_t position) {
    return 1.0 / std::log2(static_cast<double>(position) + 1.0);
}

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

nlohmann::ordered_json values_json(const MetricValues& v) {
    nlohmann::ordered_json out;
    out["recall"] = v.recall;
    out["precision"] = v.precision;
    out["ndcg"] = v.ndcg;
    out["mrr"] = v.mrr;
    return out;
}

}  // namespace

double recall_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k) {
    const auto prefix = checked_prefix(retrieved, gt, k);
    return static_cast<double>(hits(prefix, gt)) / static_cast<double>(gt.size());
}

double precision_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k) {
    const auto prefix = checked_prefix(retrieved, gt, k);
    return static_cast<double>(hits(prefix, gt)) / static_cast<double>(k);
}

double ndcg_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k, NdcgVariant variant) {
    const auto prefix = checked_prefix(retrieved, gt, k);
    const std::size_t ideal_len = std::min(gt.size(), static_cast<std::size_t>(k));
    const std::size_t dcg_len =
        variant == NdcgVariant::Truncated ? std::min(ideal_len, prefix.size()) : prefix.size();
    double dcg = 0.0;
    for (std::size_t i = 0; i < dcg_len; ++i) {
        if (gt.count(prefix[i])) {
            dcg += discount(i + 1);
        }
    }
    double idcg = 0.0;
    for (std::size_t i = 1; i <= ideal_len; ++i) {
        idcg += discount(i);
    }
    return dcg / idcg;
}

double mrr_at_k(std::span<const int> retrieved, const std::set<int>& gt, int k) {
    const auto prefix = checked_prefix(retrieved, gt, k);
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (gt.count(prefix[i])) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

MetricReport evaluate(std::span<const RetrievalRun> runs, std::span<const EvalSample> samples,
                      std::span<const int> ks, NdcgVariant variant) {
    if (ks.empty()) {
        throw Error(ErrorCode::ValidationError, "no K values requested");
    }
    std::unordered_map<std::string, const RetrievalRun*> by_query;
    for (const auto& run : runs) {
        by_query[run.query_id] = &run;
    }

    MetricReport report;
    report.variant = variant;
    report.ks.assign(ks.begin(), ks.end());
    std::map<int, std::array<CompensatedSum, 4>> sums;

    for (const auto& sample : samples) {
        const auto it = by_query.find(sample.query_id);
        if (it == by_query.end()) {
            throw Error(ErrorCode::MissingRun, "no retrieval run for query " + sample.query_id);
        }
        SampleMetrics row{sample.query_id, {}};
        for (int k : ks) {
            const auto list = topk(*it->second, k);
            MetricValues v{recall_at_k(list, sample.evidence_pages, k),
                           precision_at_k(list, sample.evidence_pages, k),
                           ndcg_at_k(list, sample.evidence_pages, k, variant),
                           mrr_at_k(list, sample.evidence_pages, k)};
            auto& s = sums[k];
            s[0].add(v.recall);
            s[1].add(v.precision);
            s[2].add(v.ndcg);
            s[3].add(v.mrr);
            row.by_k[k] = v;
        }
        report.samples.push_back(std::move(row));
    }

    const double n = static_cast<double>(samples.size());
    for (int k : ks) {
        if (samples.empty()) {
            report.mean[k] = {};
            continue;
        }
        const auto& s = sums[k];
        report.mean[k] = {s[0].value() / n, s[1].value() / n, s[2].value() / n, s[3].value() / n};
    }
    return report;
}

std::vector<EvalSample> load_eval_dataset(const std::filesystem::path& path) {
    std::vector<EvalSample> samples;
    std::unordered_set<std::string> ids;
    for (const auto& row : io::read_jsonl(path)) {
        try {
            EvalSample s;
            s.query_id = row.at("query_id").get<std::string>();
            s.doc_id = row.value("doc_id", std::string{});
            s.question = row.value("question", std::string{});
            for (const auto& p : row.at("evidence_pages")) {
                s.evidence_pages.insert(p.get<int>());
            }
            if (row.contains("answer") && row["answer"].is_string()) {
                s.answer = row["answer"].get<std::string>();
            }
            if (s.evidence_pages.empty()) {
                throw Error(ErrorCode::EmptyGroundTruth, "query " + s.query_id + " has no evidence pages");
            }
            if (!ids.insert(s.query_id).second) {
                throw Error(ErrorCode::ValidationError, "duplicate query_id " + s.query_id);
            }
            samples.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
        }
    }
    return samples;
}

std::string encode_eval_jsonl(std::span<const EvalSample> samples) {
    std::vector<nlohmann::ordered_json> rows;
    for (const auto& s : samples) {
        nlohmann::ordered_json row;
        row["query_id"] = s.query_id;
        row["doc_id"] = s.doc_id;
        row["question"] = s.question;
        row["evidence_pages"] = std::vector<int>(s.evidence_pages.begin(), s.evidence_pages.end());
        if (s.answer) {
            row["answer"] = *s.answer;
        }
        rows.push_back(std::move(row));
    }
    return io::to_jsonl(rows);
}

void check_evidence_range(std::span<const EvalSample> samples, int n_pages) {
    for (const auto& s : samples) {
        for (int p : s.evidence_pages) {
            if (p < 0 || p >= n_pages) {
                throw Error(ErrorCode::PageOutOfRange,
                            "query " + s.query_id + " cites page " + std::to_string(p));
            }
        }
    }
}

std::string encode_report_json(const MetricReport& report) {
    nlohmann::ordered_json doc;
    doc["ndcg_variant"] = report.variant == NdcgVariant::Truncated ? "truncated" : "standard";
    doc["sample_count"] = report.sample_count();
    doc["ks"] = report.ks;
    nlohmann::ordered_json mean;
    for (int k : report.ks) {
        mean[std::to_string(k)] = values_json(report.mean.at(k));
    }
    doc["mean"] = std::move(mean);
    auto rows = nlohmann::ordered_json::array();
    for (const auto& s : report.samples) {
        nlohmann::ordered_json row;
        row["query_id"] = s.query_id;
        nlohmann::ordered_json per_k;
        for (int k : report.ks) {
            per_k[std::to_string(k)] = values_json(s.by_k.at(k));
        }
        row["metrics"] = std::move(per_k);
        rows.push_back(std::move(row));
    }
    doc["samples"] = std::move(rows);
    return doc.dump(2) + "\n";
}

std::string format_report_table(const MetricReport& report) {
    std::string out;
    char line[128];
    std::snprintf(line, sizeof line, "%-4s %10s %12s %10s %10s\n", "K", "Recall@K", "Precision@K",
                  "NDCG@K", "MRR@K");
    out += line;
    for (int k : report.ks) {
        const auto& v = report.mean.at(k);
        std::snprintf(line, sizeof line, "%-4d %10.4f %12.4f %10.4f %10.4f\n", k, v.recall,
                      v.precision, v.ndcg, v.mrr);
        out += line;
    }
    std::snprintf(line, sizeof line, "samples: %zu  ndcg: %s\n", report.sample_count(),
                  report.variant == NdcgVariant::Truncated ? "truncated" : "standard");
    out += line;
    return out;
}

}  // namespace pagegraph
