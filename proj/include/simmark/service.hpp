#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "simmark/config.hpp"

namespace simmark {

struct ServiceReply {
    int status = 200;
    nlohmann::json body;
};

/// HTTP front end for detection. Requests share the immutable runtime and
/// are otherwise independent.
class DetectionService {
public:
    explicit DetectionService(Runtime runtime);
    ~DetectionService();
    DetectionService(const DetectionService&) = delete;
    DetectionService& operator=(const DetectionService&) = delete;

    /// POST /v1/detect body handling: 200 with a report, 422 when inconclusive,
    /// 400 on a malformed body or empty text.
    ServiceReply handle_detect(const std::string& body) const;
    /// GET /v1/health
    ServiceReply handle_health() const;

    /// Binds the listening socket; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. Requires a prior bind().
    void listen();
    void stop();

private:
    struct Impl;
    Runtime runtime_;
    std::unique_ptr<Impl> impl_;
};

} // namespace simmark
