#include <gtest/gtest.h>

#include "pagegraph/datagen.hpp"
#include "pagegraph/error.hpp"
#include "pagegraph/io.hpp"
#include "support.hpp"

using namespace pagegraph;
using namespace testing_support;

namespace {

std::vector<std::string> pool(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("doc/" + std::to_string(i));
    return out;
}

// Generator echoes the target; scorer answers from a script keyed by item index.
class EchoGen final : public GenOracle {
public:
    GenResponse generate(const GenRequest& r) const override {
        return {"question for " + r.image_ref + " at " + std::to_string(r.target_score), r.target_score, "ans"};
    }
};

class ScriptedScorer final : public LogicalOracle {
public:
    explicit ScriptedScorer(std::map<std::string, int> by_query) : by_query_(std::move(by_query)) {}
    LogicalScore score(const OracleRequest& r) const override { return LogicalScore(by_query_.at(r.query_id)); }

private:
    std::map<std::string, int> by_query_;
};

class FlakyGen final : public GenOracle {
public:
    explicit FlakyGen(int failures) : left_(failures) {}
    GenResponse generate(const GenRequest& r) const override {
        if (left_-- > 0) throw Error(ErrorCode::TransportError, "flaky");
        return {"q", r.target_score, "a"};
    }

private:
    mutable int left_;
};

class EchoScorer final : public LogicalOracle {
public:
    LogicalScore score(const OracleRequest&) const override { return LogicalScore(3); }
};

}  // namespace

TEST(Sampling, RoundRobinCoversAllScores) {
    DatagenConfig c;
    c.n_samples = 5;
    c.image_pool = pool(3);
    c.round_robin = true;
    std::set<int> scores;
    for (const auto& item : sample_targets(c)) scores.insert(item.target_score);
    EXPECT_EQ(scores, (std::set<int>{1, 2, 3, 4, 5}));
}

TEST(Sampling, DeterministicPerSeed) {
    DatagenConfig c;
    c.n_samples = 200;
    c.image_pool = pool(17);
    c.focus_pool = {std::nullopt, std::string("tables"), std::string("charts")};
    c.seed = 42;
    EXPECT_EQ(sample_targets(c), sample_targets(c));
    c.seed = 43;
    DatagenConfig d = c;
    d.seed = 42;
    EXPECT_NE(sample_targets(c), sample_targets(d));
}

TEST(Sampling, UniformWithinTenPercent) {
    DatagenConfig c;
    c.n_samples = 5000;
    c.image_pool = pool(10);
    c.seed = 7;
    std::array<int, 6> counts{};
    for (const auto& item : sample_targets(c)) ++counts[static_cast<std::size_t>(item.target_score)];
    for (int s = 1; s <= 5; ++s) {
        EXPECT_GE(counts[s], 900);
        EXPECT_LE(counts[s], 1100);
    }
}

TEST(Sampling, Errors) {
    DatagenConfig c;
    c.n_samples = 3;
    EXPECT_THROW(sample_targets(c), Error);
    c.image_pool = pool(1);
    c.n_samples = 0;
    EXPECT_THROW(sample_targets(c), Error);
}

TEST(Filter, AllPairsClassified) {
    std::vector<GenItem> items;
    std::map<std::string, int> script;
    for (int s = 1; s <= 5; ++s)
        for (int sp = 1; sp <= 5; ++sp) {
            const int idx = static_cast<int>(items.size());
            items.push_back({idx, 0, "doc/0", s, std::nullopt});
            script["gen-" + std::to_string(idx)] = sp;
        }
    const auto result = generate_and_check(items, EchoGen(), ScriptedScorer(script));
    ASSERT_EQ(result.triplets.size(), 25u);
    int retained = 0;
    for (const auto& t : result.triplets) {
        const bool expect = t.target_score - t.predicted_score <= 1 && t.predicted_score - t.target_score <= 1;
        EXPECT_EQ(t.retained, expect);
        retained += t.retained;
    }
    EXPECT_EQ(retained, 13);
    EXPECT_FALSE(within_tolerance(5, 3));
    EXPECT_TRUE(within_tolerance(4, 5));
}

TEST(Filter, EchoRetainsAll) {
    DatagenConfig c;
    c.n_samples = 30;
    c.image_pool = pool(4);
    const auto items = sample_targets(c);
    std::map<std::string, int> script;
    for (const auto& i : items) script["gen-" + std::to_string(i.index)] = i.target_score;
    const auto result = generate_and_check(items, EchoGen(), ScriptedScorer(script));
    for (const auto& t : result.triplets) EXPECT_TRUE(t.retained);
    int generated = 0;
    for (const auto& c2 : result.per_score) generated += c2.generated;
    EXPECT_EQ(generated, 30);
}

TEST(Pipeline, RetriesThenExcludes) {
    const std::vector<GenItem> items{{0, 0, "doc/0", 3, std::nullopt}};
    EXPECT_EQ(generate_and_check(items, FlakyGen(2), EchoScorer()).triplets.size(), 1u);
    const auto failed = generate_and_check(items, FlakyGen(3), EchoScorer());
    EXPECT_TRUE(failed.triplets.empty());
    ASSERT_EQ(failed.failures.size(), 1u);
    EXPECT_EQ(failed.per_score[2].failed, 1);
}

TEST(Pipeline, ConcurrencyKeepsOrder) {
    DatagenConfig c;
    c.n_samples = 40;
    c.image_pool = pool(6);
    c.seed = 3;
    const auto items = sample_targets(c);
    std::map<std::string, int> script;
    for (const auto& i : items) script["gen-" + std::to_string(i.index)] = 1 + i.index % 5;
    const auto serial = generate_and_check(items, EchoGen(), ScriptedScorer(script));
    DatagenOptions o;
    o.concurrency = 6;
    const auto parallel = generate_and_check(items, EchoGen(), ScriptedScorer(script), o);
    EXPECT_EQ(serial.triplets, parallel.triplets);
}

TEST(Export, RoundTripAndRetainedOnly) {
    std::vector<Triplet> ts;
    for (int i = 0; i < 100; ++i) {
        const int s = 1 + i % 5, sp = 1 + (i * 7) % 5;
        ts.push_back({"q \"" + std::to_string(i) + "\",\nline", "doc/" + std::to_string(i), s, sp,
                      within_tolerance(s, sp), "a" + std::to_string(i)});
    }
    TempDir tmp;
    EXPECT_EQ(export_triplets(ts, tmp.path / "all.jsonl", false), 100u);
    EXPECT_EQ(load_triplets(tmp.path / "all.jsonl"), ts);
    const std::size_t kept = export_triplets(ts, tmp.path / "kept.jsonl", true);
    std::vector<Triplet> expect;
    for (const auto& t : ts)
        if (t.retained) expect.push_back(t);
    EXPECT_EQ(kept, expect.size());
    EXPECT_EQ(load_triplets(tmp.path / "kept.jsonl"), expect);

    io::write_file_atomic(tmp.path / "bad.jsonl",
                          R"({"question":"q","image_ref":"r","target_score":5,"predicted_score":1,"retained":true,"answer":"a"})" "\n");
    EXPECT_THROW(load_triplets(tmp.path / "bad.jsonl"), Error);
}

TEST(Export, ReviewCsvQuoting) {
    const std::vector<Triplet> ts{{"plain", "doc/1", 3, 4, true, "x"}, {"has, comma \"q\"", "doc/2", 1, 5, false, "y"}};
    EXPECT_EQ(encode_review_csv(ts),
              "question,image_ref,target_score,predicted_score,answer\n"
              "plain,doc/1,3,4,x\n"
              "\"has, comma \"\"q\"\"\",doc/2,1,5,y\n");
}
