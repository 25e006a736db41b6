#include "simmark/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace simmark {

struct DetectionService::Impl {
    httplib::Server server;
};

DetectionService::DetectionService(Runtime runtime) : runtime_(std::move(runtime)), impl_(std::make_unique<Impl>()) {
    runtime_.detector.validate();
    auto send = [](httplib::Response& res, const ServiceReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    impl_->server.Post("/v1/detect", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, handle_detect(req.body));
    });
    impl_->server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, handle_health());
    });
}

DetectionService::~DetectionService() { stop(); }

ServiceReply DetectionService::handle_detect(const std::string& body) const {
    nlohmann::json request;
    try {
        request = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error&) {
        return {400, {{"error", "InvalidRequest"}, {"message", "body is not valid JSON"}}};
    }
    if (!request.is_object() || !request.contains("text") || !request["text"].is_string())
        return {400, {{"error", "InvalidRequest"}, {"message", "expected {\"text\": string}"}}};
    try {
        const auto report = detect(runtime_.detector, *runtime_.embedder, request["text"].get<std::string>());
        return {report.verdict == Verdict::Inconclusive ? 422 : 200, to_json(report)};
    } catch (const Error& e) {
        if (is_runtime_failure(e.code())) {
            spdlog::error("detect failed: {}", e.what());
            return {503, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}}};
        }
        return {400, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}}};
    }
}

ServiceReply DetectionService::handle_health() const {
    return {200, {{"status", "ok"}, {"provenance", provenance(runtime_)}}};
}

int DetectionService::bind(const std::string& host, int port) {
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(Errc::IoError, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void DetectionService::listen() {
    if (!impl_->server.listen_after_bind() && impl_->server.is_running())
        throw Error(Errc::IoError, "service stopped unexpectedly");
}

void DetectionService::stop() {
    if (impl_) impl_->server.stop();
}

} // namespace simmark
