#include <doctest.h>

#include <thread>

#include "simmark/error.hpp"
#include "simmark/service.hpp"
#include "simmark/simulation.hpp"
#include "support.hpp"

using namespace simmark;

namespace {

Runtime small_runtime() {
    Runtime rt;
    EmbedderSpec spec;
    spec.dim = 32;
    rt.embedder = std::make_shared<SyntheticEmbedder>(spec);
    rt.detector.interval = Interval(0.0, 0.09);
    rt.detector.p0 = 0.19;
    rt.detector.beta = 2.0;
    return rt;
}

std::string long_text() {
    SimulationConfig c;
    c.sentences_per_doc = 12;
    return synthesize_human_texts(c, 5, 1).front();
}

} // namespace

TEST_CASE("service request handling") {
    DetectionService service(small_runtime());
    CHECK(service.handle_health().status == 200);
    CHECK(service.handle_health().body["status"] == "ok");
    CHECK(service.handle_health().body["provenance"]["embedder_model"] == "synthetic");
    CHECK(service.handle_detect("not json").status == 400);
    CHECK(service.handle_detect(R"({"txt": "x"})").status == 400);
    CHECK(service.handle_detect(R"({"text": "   "})").status == 400);
    const auto short_reply = service.handle_detect(R"({"text": "One sentence here. Another one there."})");
    CHECK(short_reply.status == 422);
    CHECK(short_reply.body["verdict"] == "inconclusive");
    CHECK(short_reply.body["N"] == 1);
    const auto ok = service.handle_detect(nlohmann::json{{"text", long_text()}}.dump());
    CHECK(ok.status == 200);
    CHECK(ok.body["N"] == 12);
}

TEST_CASE("service refuses an uncalibrated detector") {
    auto rt = small_runtime();
    rt.detector.beta = NAN;
    CHECK_THROWS_AS(DetectionService(std::move(rt)), Error);
}

TEST_CASE("service over HTTP answers concurrent requests identically") {
    DetectionService service(small_runtime());
    const int port = service.bind("127.0.0.1", 0);
    std::thread server([&] { service.listen(); });

    httplib::Client probe("127.0.0.1", port);
    for (int i = 0; i < 100; ++i) {
        if (probe.Get("/v1/health")) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    auto health = probe.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    const std::string body = nlohmann::json{{"text", long_text()}}.dump();
    std::vector<std::string> replies(8);
    std::vector<std::thread> clients;
    for (int t = 0; t < 8; ++t) {
        clients.emplace_back([&, t] {
            httplib::Client c("127.0.0.1", port);
            if (auto r = c.Post("/v1/detect", body, "application/json"); r && r->status == 200) replies[t] = r->body;
        });
    }
    for (auto& c : clients) c.join();
    CHECK_FALSE(replies[0].empty());
    for (const auto& r : replies) CHECK(r == replies[0]);

    auto short_reply = probe.Post("/v1/detect", R"({"text": "Two sentences. Only two."})", "application/json");
    REQUIRE(short_reply);
    CHECK(short_reply->status == 422);
    auto bad = probe.Post("/v1/detect", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    service.stop();
    server.join();
}
