#include "pagegraph/oracle.hpp"

#include <cmath>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pagegraph/error.hpp"
#include "pagegraph/io.hpp"

namespace pagegraph {

namespace {

using json = nlohmann::json;

json parse_body(const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ProtocolError, std::string("response is not JSON: ") + e.what());
    }
}

int score_field(const json& obj, const char* key) {
    if (!obj.contains(key)) {
        throw Error(ErrorCode::ProtocolError, std::string("missing \"") + key + "\"");
    }
    const auto& v = obj[key];
    long long value = 0;
    if (v.is_number_integer()) {
        value = v.get<long long>();
    } else if (v.is_string() && std::regex_match(v.get<std::string>(), std::regex("[0-9]+"))) {
        value = std::stoll(v.get<std::string>());
    } else {
        throw Error(ErrorCode::ProtocolError, std::string("\"") + key + "\" is not an integer");
    }
    if (value < 1 || value > 5) {
        throw Error(ErrorCode::ProtocolError,
                    std::string("\"") + key + "\" out of range: " + std::to_string(value));
    }
    return static_cast<int>(value);
}

std::string nonempty_string(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string() || obj[key].get<std::string>().empty()) {
        throw Error(ErrorCode::ProtocolError, std::string("\"") + key + "\" must be a non-empty string");
    }
    return obj[key].get<std::string>();
}

}  // namespace

LogicalScore::LogicalScore(int value) : value_(value) {
    if (value < 1 || value > 5) {
        throw Error(ErrorCode::ValidationError, "logical score must be in 1..5, got " + std::to_string(value));
    }
}

std::string page_image_ref(const std::string& doc_id, int page_id) {
    return doc_id + "/" + std::to_string(page_id);
}

// ---------------------------------------------------------------------------
// Fixture-backed oracles
// ---------------------------------------------------------------------------

MockOracle::MockOracle(const std::vector<FixtureEntry>& entries) {
    for (const auto& e : entries) {
        const LogicalScore score(e.score);
        auto [it, inserted] = table_.emplace(std::pair(e.query_id, e.page_id), score);
        if (!inserted && it->second != score) {
            throw Error(ErrorCode::ValidationError, "conflicting fixture entries for (" + e.query_id +
                                                        ", " + std::to_string(e.page_id) + ")");
        }
    }
}

MockOracle MockOracle::from_jsonl(const std::filesystem::path& path) {
    return MockOracle(parse_fixture_jsonl(path));
}

LogicalScore MockOracle::score(const OracleRequest& request) const {
    const auto it = table_.find(std::pair(request.query_id, request.page.page_id));
    if (it == table_.end()) {
        throw Error(ErrorCode::MissingFixtureEntry,
                    "(" + request.query_id + ", " + std::to_string(request.page.page_id) + ")");
    }
    return it->second;
}

std::vector<FixtureEntry> parse_fixture_jsonl(const std::filesystem::path& path) {
    std::vector<FixtureEntry> entries;
    for (const auto& row : io::read_jsonl(path)) {
        if (!row.is_object() || !row.contains("query_id") || !row["query_id"].is_string() ||
            !row.contains("page_id") || !row["page_id"].is_number_integer() ||
            !row.contains("score") || !row["score"].is_number_integer()) {
            throw Error(ErrorCode::MalformedFile,
                        path.string() + ": fixture rows need query_id, page_id, score");
        }
        entries.push_back({row["query_id"].get<std::string>(), row["page_id"].get<int>(),
                           row["score"].get<int>()});
    }
    return entries;
}

std::string encode_fixture_jsonl(const std::vector<FixtureEntry>& entries) {
    std::vector<nlohmann::ordered_json> rows;
    rows.reserve(entries.size());
    for (const auto& e : entries) {
        nlohmann::ordered_json row;
        row["query_id"] = e.query_id;
        row["page_id"] = e.page_id;
        row["score"] = e.score;
        rows.push_back(std::move(row));
    }
    return io::to_jsonl(rows);
}

MockGenOracle::MockGenOracle(const std::vector<GenFixtureEntry>& entries) {
    for (const auto& e : entries) {
        table_[std::pair(e.image_ref, e.target_score)] = e.response;
    }
}

MockGenOracle MockGenOracle::from_jsonl(const std::filesystem::path& path) {
    std::vector<GenFixtureEntry> entries;
    for (const auto& row : io::read_jsonl(path)) {
        if (!row.is_object() || !row.contains("image_ref") || !row["image_ref"].is_string() ||
            !row.contains("target_score") || !row["target_score"].is_number_integer()) {
            throw Error(ErrorCode::MalformedFile,
                        path.string() + ": generation fixture rows need image_ref and target_score");
        }
        try {
            entries.push_back({row["image_ref"].get<std::string>(), row["target_score"].get<int>(),
                               decode_generate_response(row.dump())});
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedFile, path.string() + ": " + e.what());
        }
    }
    return MockGenOracle(entries);
}

GenResponse MockGenOracle::generate(const GenRequest& request) const {
    const auto it = table_.find(std::pair(request.image_ref, request.target_score));
    if (it == table_.end()) {
        throw Error(ErrorCode::MissingFixtureEntry,
                    "(" + request.image_ref + ", " + std::to_string(request.target_score) + ")");
    }
    return it->second;
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

HttpEndpoint::HttpEndpoint(const std::string& url, HttpOptions options) : options_(options) {
    static const std::regex kUrl(R"(^(http://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) {
        throw Error(ErrorCode::ConfigError, "unsupported oracle URL '" + url + "' (expected http://host:port[/path])");
    }
    host_ = m[1].str();
    prefix_ = m[2].matched ? m[2].str() : std::string{};
    while (!prefix_.empty() && prefix_.back() == '/') {
        prefix_.pop_back();
    }
    if (options_.max_attempts < 1) {
        throw Error(ErrorCode::ConfigError, "max_attempts must be >= 1");
    }
}

std::string HttpEndpoint::post(const std::string& path, const std::string& body) const {
    ErrorCode last_code = ErrorCode::TransportError;
    std::string last_message;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(options_.backoff_base * (1LL << (attempt - 1)));
        }
        httplib::Client client(host_);
        client.set_connection_timeout(options_.timeout);
        client.set_read_timeout(options_.timeout);
        client.set_write_timeout(options_.timeout);

        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(prefix_ + path, body, "application/json");
        const auto elapsed = std::chrono::steady_clock::now() - started;

        if (!res) {
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && elapsed >= options_.timeout * 9 / 10);
            last_code = timed_out ? ErrorCode::Timeout : ErrorCode::TransportError;
            last_message = httplib::to_string(err);
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            return res->body;
        }
        last_code = ErrorCode::TransportError;
        last_message = "HTTP " + std::to_string(res->status);
        if (res->status != 429 && res->status < 500) {
            break;
        }
    }
    throw Error(last_code, "POST " + host_ + prefix_ + path + ": " + last_message);
}

std::string encode_score_request(const OracleRequest& request) {
    nlohmann::ordered_json body;
    body["query_id"] = request.query_id;
    body["query_text"] = request.query_text;
    body["doc_id"] = request.page.doc_id;
    body["page_id"] = request.page.page_id;
    body["image_ref"] = request.page.image_ref;
    return body.dump();
}

LogicalScore decode_score_response(const std::string& body) {
    const auto doc = parse_body(body);
    if (!doc.is_object()) {
        throw Error(ErrorCode::ProtocolError, "score response is not an object");
    }
    const auto& v = doc.contains("score") ? doc["score"] : json{};
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::ProtocolError, "\"score\" is not an integer");
    }
    const auto value = v.get<long long>();
    if (value < 1 || value > 5) {
        throw Error(ErrorCode::ProtocolError, "\"score\" out of range: " + std::to_string(value));
    }
    return LogicalScore(static_cast<int>(value));
}

std::string encode_generate_request(const GenRequest& request) {
    nlohmann::ordered_json body;
    body["image_ref"] = request.image_ref;
    body["target_score"] = request.target_score;
    body["focus"] = request.focus ? nlohmann::ordered_json(*request.focus) : nlohmann::ordered_json(nullptr);
    return body.dump();
}

GenResponse decode_generate_response(const std::string& body) {
    const auto doc = parse_body(body);
    if (!doc.is_object()) {
        throw Error(ErrorCode::ProtocolError, "generate response is not an object");
    }
    return {nonempty_string(doc, "query"), score_field(doc, "relevance_score"),
            nonempty_string(doc, "answer")};
}

HttpOracle::HttpOracle(const std::string& url, HttpOptions options) : endpoint_(url, options) {}

LogicalScore HttpOracle::score(const OracleRequest& request) const {
    return decode_score_response(endpoint_.post("/score", encode_score_request(request)));
}

HttpGenOracle::HttpGenOracle(const std::string& url, HttpOptions options) : endpoint_(url, options) {}

GenResponse HttpGenOracle::generate(const GenRequest& request) const {
    return decode_generate_response(endpoint_.post("/generate", encode_generate_request(request)));
}

// ---------------------------------------------------------------------------

LogicalScore MemoizedOracle::score(const OracleRequest& request) const {
    const auto key = std::pair(request.query_id, request.page.page_id);
    {
        std::lock_guard lock(mutex_);
        if (const auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
    }
    const LogicalScore fresh = inner_.score(request);
    std::lock_guard lock(mutex_);
    const auto [it, inserted] = memo_.emplace(key, fresh);
    if (inserted) {
        ++calls_;
    }
    return it->second;
}

std::size_t MemoizedOracle::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

}  // namespace pagegraph
