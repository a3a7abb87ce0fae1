#include "pagegraph/config.hpp"

#include <cstdlib>

#include "pagegraph/error.hpp"

namespace pagegraph {

namespace {

struct ParsedSpec {
    bool mock = false;
    std::string target;  // fixture path or URL
};

ParsedSpec parse_spec(const std::string& spec) {
    if (spec.rfind("mock:", 0) == 0) {
        return {true, spec.substr(5)};
    }
    if (spec.rfind("http://", 0) == 0) {
        return {false, spec};
    }
    if (spec.rfind("http:", 0) == 0) {
        return {false, spec.substr(5)};
    }
    if (spec.empty()) {
        throw Error(ErrorCode::ConfigError,
                    std::string("no oracle configured (use --oracle or set ") + kOracleUrlEnv + ")");
    }
    throw Error(ErrorCode::ConfigError, "oracle spec must be mock:<path> or http:<url>, got '" + spec + "'");
}

}  // namespace

TraversalConfig RunConfig::traversal() const {
    TraversalConfig tc;
    tc.w = w;
    tc.n_hop = n_hop;
    tc.mode = mode;
    tc.combine_weight = combine_weight;
    tc.concurrency = concurrency;
    tc.validate();
    return tc;
}

std::string resolve_oracle_spec(const std::string& flag) {
    if (!flag.empty()) {
        return flag;
    }
    const char* env = std::getenv(kOracleUrlEnv);
    if (env == nullptr || *env == '\0') {
        return {};
    }
    const std::string url(env);
    if (url.rfind("mock:", 0) == 0 || url.rfind("http:", 0) == 0) {
        return url;
    }
    return url.find("://") == std::string::npos ? "http:http://" + url : "http:" + url;
}

std::unique_ptr<LogicalOracle> make_oracle(const std::string& spec, HttpOptions http) {
    const auto parsed = parse_spec(spec);
    if (parsed.mock) {
        return std::make_unique<MockOracle>(MockOracle::from_jsonl(parsed.target));
    }
    return std::make_unique<HttpOracle>(parsed.target, http);
}

std::unique_ptr<GenOracle> make_gen_oracle(const std::string& spec, HttpOptions http) {
    const auto parsed = parse_spec(spec);
    if (parsed.mock) {
        return std::make_unique<MockGenOracle>(MockGenOracle::from_jsonl(parsed.target));
    }
    return std::make_unique<HttpGenOracle>(parsed.target, http);
}

}  // namespace pagegraph
