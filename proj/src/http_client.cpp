#include "simmark/http_client.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

namespace simmark::http {

Endpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(Errc::InvalidConfig, "endpoint needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    Endpoint ep;
    ep.origin = url.substr(0, slash);
    if (slash != std::string::npos) ep.prefix = url.substr(slash);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
    return ep;
}

namespace {

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

} // namespace

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& policy, Errc failure,
                         int* attempts) {
    const Endpoint ep = parse_endpoint(endpoint);
    httplib::Client client(ep.origin);
    const auto timeout = std::chrono::milliseconds(policy.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!policy.api_key.empty()) headers.emplace("Authorization", "Bearer " + policy.api_key);

    const std::string payload = body.dump();
    const std::string target = ep.prefix + path;
    std::string last_error;
    int last_status = 0;
    int made = 0;
    for (int attempt = 0; attempt <= policy.max_retries; ++attempt) {
        if (attempt > 0 && policy.backoff_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(policy.backoff_ms << (attempt - 1)));
        }
        ++made;
        if (attempts) *attempts = made;
        auto res = client.Post(target, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            last_status = 0;
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(failure, "malformed JSON reply from " + endpoint + target + ": " + e.what());
            }
        }
        last_status = res->status;
        last_error = "HTTP " + std::to_string(res->status) + " from " + endpoint + target;
        if (!retryable(res->status)) break;
    }
    if (last_status != 0) throw StatusError(failure, last_status, last_error);
    throw Error(failure, last_error + " (" + std::to_string(made) + " attempts)");
}

} // namespace simmark::http
