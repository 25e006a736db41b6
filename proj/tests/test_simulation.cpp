#include <doctest.h>

#include <cmath>

#include "simmark/error.hpp"
#include "simmark/simulation.hpp"

using namespace simmark;

namespace {

SimulationConfig small_config() {
    SimulationConfig c;
    c.n_calibration = 150;
    c.n_human = 60;
    c.n_watermarked = 60;
    c.sentences_per_doc = 12;
    c.threads = 2;
    return c;
}

} // namespace

TEST_CASE("simulation interval carries the configured model mass") {
    SimulationConfig c;
    const auto iv = simulation_interval(c);
    CHECK(model_interval_mass(c, iv) == doctest::Approx(c.p0).epsilon(1e-9));
    // Median of a symmetric law is zero.
    CHECK(std::abs(iv.a) < 1e-9);
    c.interval = Interval(0.1, 0.2);
    CHECK(simulation_interval(c) == Interval(0.1, 0.2));
}

TEST_CASE("simulation config validation and JSON round trip") {
    SimulationConfig c;
    c.p0 = 1.2;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SimulationConfig{};
    c.merge_p = 0.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SimulationConfig{};
    c.decay = DecayFactor::hard();
    c.perturb_sigma = 0.03;
    const auto back = simulation_config_from_json(to_json(c));
    CHECK(std::isinf(back.decay.K));
    CHECK(back.perturb_sigma == 0.03);
    CHECK_THROWS_AS(simulation_config_from_json(nlohmann::json::parse(R"({"embed_dim": "big"})")), Error);
}

TEST_CASE("random sentences are reproducible and well formed") {
    std::uint64_t a = 5, b = 5;
    const auto s1 = random_sentence(a, 8, 16);
    CHECK(s1 == random_sentence(b, 8, 16));
    CHECK(a == b);
    CHECK(s1.back() == '.');
    CHECK(std::isupper(static_cast<unsigned char>(s1.front())));
    CHECK(split_sentences(s1).size() == 1);
    CHECK(random_sentence(a, 8, 16) != s1);
}

TEST_CASE("word-swap paraphrases depend only on seed, sentence and index") {
    WordSwapParaphraser p(3, 0.3);
    const ParaphraseRequest r{"Alpha beta gamma delta epsilon zeta.", "ctx", 3, ""};
    const auto first = p.paraphrase(r);
    CHECK(first.size() == 3);
    CHECK(p.paraphrase(r) == first);
    CHECK(first.back().back() == '.');
    WordSwapParaphraser none(3, 0.0);
    CHECK(none.paraphrase(r).front() == r.sentence);
}

TEST_CASE("simulation study is reproducible and separates the classes") {
    const auto c = small_config();
    const auto r1 = run_simulation_study(c, 7);
    auto single = c;
    single.threads = 1;
    const auto r2 = run_simulation_study(single, 7);
    CHECK(r1.summary == r2.summary);
    CHECK(r1.scores.scores(Label::Watermarked) == r2.scores.scores(Label::Watermarked));
    CHECK(r1.summary.roc_auc > 0.95);
    REQUIRE(r1.summary.mean_attempts);
    CHECK(*r1.summary.mean_attempts > 3.0);
    CHECK(*r1.summary.mean_attempts < 8.0);
    // One virtual millisecond per candidate.
    CHECK(*r1.summary.latency_per_sentence_ms == doctest::Approx(*r1.summary.mean_attempts));
    CHECK(r1.calibration.p0 == doctest::Approx(c.p0).epsilon(0.25));
    const auto j = to_json(r1);
    CHECK(j["summary"].contains("roc_auc"));
    CHECK(j["documents"]["human"] == 60);
}

TEST_CASE("parallel_for reports worker exceptions") {
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 6) throw Error(Errc::InvalidRequest, "boom");
                    }),
                    Error);
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
}
