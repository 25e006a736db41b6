#pragma once

#include <string>

#include <json.hpp>

#include "simmark/error.hpp"

namespace simmark::http {

struct RetryPolicy {
    int timeout_ms = 30000;
    int max_retries = 3;
    /// Delay before the first retry; doubles on each subsequent retry.
    int backoff_ms = 200;
    /// Sent as a bearer token when non-empty.
    std::string api_key;
};

/// Non-2xx reply. Carries the status so callers can react to specific codes.
class StatusError : public Error {
public:
    StatusError(Errc code, int status, const std::string& what) : Error(code, what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string prefix; // path prefix without trailing slash
};

Endpoint parse_endpoint(const std::string& url);

/// POSTs `body` to `endpoint` + `path` and parses the JSON reply.
/// Transport errors, 408, 429 and 5xx are retried up to `policy.max_retries`
/// times; other statuses fail immediately. Failures throw Error(`failure`)
/// (StatusError when the server answered). `attempts`, when given, receives
/// the number of requests made.
nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& policy, Errc failure,
                         int* attempts = nullptr);

} // namespace simmark::http
