#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pagegraph {

/// Logical relevance on the 1..5 scale; construction rejects anything else.
class LogicalScore {
public:
    explicit LogicalScore(int value);

    int value() const noexcept { return value_; }
    /// Maps 1..5 onto [0, 1] as (value - 1) / 4.
    double unit() const noexcept { return (value_ - 1) / 4.0; }

    bool operator==(const LogicalScore&) const = default;

private:
    int value_;
};

struct PageRef {
    std::string doc_id;
    int page_id = 0;
    std::string image_ref;  // opaque; resolved by whoever renders the page
};

struct OracleRequest {
    std::string query_id;
    std::string query_text;
    PageRef page;
};

struct GenRequest {
    std::string image_ref;
    int target_score = 0;
    std::optional<std::string> focus;
};

struct GenResponse {
    std::string query;
    int relevance_score = 0;
    std::string answer;

    bool operator==(const GenResponse&) const = default;
};

/// Default image reference for a page: "<doc_id>/<page_id>".
std::string page_image_ref(const std::string& doc_id, int page_id);

/// Judges how well one page answers one query. Implementations must be safe
/// to call from several threads at once.
class LogicalOracle {
public:
    virtual ~LogicalOracle() = default;
    virtual LogicalScore score(const OracleRequest& request) const = 0;
};

/// Produces a question for an image at a requested relevance level.
class GenOracle {
public:
    virtual ~GenOracle() = default;
    virtual GenResponse generate(const GenRequest& request) const = 0;
};

struct FixtureEntry {
    std::string query_id;
    int page_id = 0;
    int score = 0;

    bool operator==(const FixtureEntry&) const = default;
};

/// Table-backed oracle. Lookups outside the table raise MissingFixtureEntry;
/// no default score is ever invented.
class MockOracle final : public LogicalOracle {
public:
    explicit MockOracle(const std::vector<FixtureEntry>& entries);
    static MockOracle from_jsonl(const std::filesystem::path& path);

    LogicalScore score(const OracleRequest& request) const override;
    std::size_t size() const noexcept { return table_.size(); }

private:
    std::map<std::pair<std::string, int>, LogicalScore> table_;
};

std::vector<FixtureEntry> parse_fixture_jsonl(const std::filesystem::path& path);
std::string encode_fixture_jsonl(const std::vector<FixtureEntry>& entries);

struct GenFixtureEntry {
    std::string image_ref;
    int target_score = 0;
    GenResponse response;
};

/// Table-backed generator keyed by (image_ref, target_score).
class MockGenOracle final : public GenOracle {
public:
    explicit MockGenOracle(const std::vector<GenFixtureEntry>& entries);
    static MockGenOracle from_jsonl(const std::filesystem::path& path);

    GenResponse generate(const GenRequest& request) const override;

private:
    std::map<std::pair<std::string, int>, GenResponse> table_;
};

struct HttpOptions {
    std::chrono::milliseconds timeout{30'000};
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{100};  // wait before retry n is base * 2^n
};

/// JSON-over-HTTP client for the oracle sidecar. Connection failures,
/// timeouts, 429 and 5xx responses are retried; anything else fails fast.
class HttpEndpoint {
public:
    HttpEndpoint(const std::string& url, HttpOptions options);

    std::string post(const std::string& path, const std::string& body) const;

private:
    std::string host_;    // scheme://host:port
    std::string prefix_;  // base path without trailing slash
    HttpOptions options_;
};

/// POST {endpoint}/score
class HttpOracle final : public LogicalOracle {
public:
    explicit HttpOracle(const std::string& url, HttpOptions options = {});
    LogicalScore score(const OracleRequest& request) const override;

private:
    HttpEndpoint endpoint_;
};

/// POST {endpoint}/generate
class HttpGenOracle final : public GenOracle {
public:
    explicit HttpGenOracle(const std::string& url, HttpOptions options = {});
    GenResponse generate(const GenRequest& request) const override;

private:
    HttpEndpoint endpoint_;
};

// Wire helpers, exposed for conformance tests.
std::string encode_score_request(const OracleRequest& request);
LogicalScore decode_score_response(const std::string& body);
std::string encode_generate_request(const GenRequest& request);
GenResponse decode_generate_response(const std::string& body);

/// Per-run memo keyed by (query_id, page_id) so each page reaches the inner
/// oracle at most once.
class MemoizedOracle final : public LogicalOracle {
public:
    explicit MemoizedOracle(const LogicalOracle& inner) : inner_(inner) {}

    LogicalScore score(const OracleRequest& request) const override;
    std::size_t calls() const;

private:
    const LogicalOracle& inner_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<std::string, int>, LogicalScore> memo_;
    mutable std::size_t calls_ = 0;
};

}  // namespace pagegraph
