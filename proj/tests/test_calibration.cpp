#include <doctest.h>

#include <cmath>
#include <random>

#include "simmark/error.hpp"
#include "simmark/calibration.hpp"
#include "support.hpp"

using namespace simmark;

namespace {

std::vector<double> uniform_samples(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> out(n);
    for (auto& x : out) x = u(gen);
    return out;
}

// Smallest grid beta with a passing FP fraction, by direct counting.
double brute_beta(const std::vector<double>& z, double fp) {
    for (int i = 0; i <= 20000; ++i) {
        const double beta = (i - 10000) / 1000.0;
        std::size_t above = 0;
        for (double v : z) above += v > beta;
        if (static_cast<double>(above) <= fp * static_cast<double>(z.size())) return beta;
    }
    return NAN;
}

} // namespace

TEST_CASE("histogram binning puts outliers in the edge bins") {
    std::vector<double> s(100, 0.0);
    s[0] = -5.0;
    s[1] = 5.0;
    s[2] = 1.0;
    const auto h = build_histogram(s, -1.0, 1.0);
    CHECK(h.counts.size() == kHistogramBins);
    CHECK(h.edges.size() == kHistogramBins + 1);
    CHECK(h.edges.front() == -1.0);
    CHECK(h.edges.back() == 1.0);
    CHECK(h.counts.front() == 1);
    CHECK(h.counts.back() == 2);
    CHECK(h.counts[500] == 97);
    CHECK(h.total == 100);
    CHECK_THROWS_AS(build_histogram(std::vector<double>(99, 0.0), -1.0, 1.0), Error);
    CHECK_THROWS_AS(build_histogram(s, 1.0, 1.0), Error);
}

TEST_CASE("interval mass is pro-rata over partially covered bins") {
    // All samples in one bin [0.0, 0.002); an interval covering a quarter of it gets a quarter of the mass.
    std::vector<double> s(200, 0.001);
    const auto h = build_histogram(s, -1.0, 1.0);
    CHECK(interval_mass(h, Interval(0.0, 0.0005)) == doctest::Approx(0.25));
    CHECK(interval_mass(h, Interval(-0.5, 0.5)) == doctest::Approx(1.0));
    CHECK(interval_mass(h, Interval(0.3, 0.5)) == 0.0);
    CHECK(estimate_p0(h, Interval(0.3, 0.5)) == kP0Clamp);
    CHECK(estimate_p0(h, Interval(-0.5, 0.5)) == 1.0 - kP0Clamp);
    try {
        estimate_p0(h, Interval(1.5, 2.0));
        FAIL("expected NoOverlap");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::NoOverlap);
    }
}

TEST_CASE("p0 of uniform samples matches the interval length") {
    const auto s = uniform_samples(200000, -1.0, 1.0, 4);
    const auto h = build_histogram(s, -1.0, 1.0);
    CHECK(estimate_p0(h, Interval(0.68, 0.76)) == doctest::Approx(0.04).epsilon(0.05));
    CHECK(estimate_p0(h, Interval(0.1003, 0.3007)) == doctest::Approx(0.1002).epsilon(0.03));
}

TEST_CASE("beta sweep agrees with direct counting") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> z(150 + trial * 10);
        for (auto& v : z) v = normal(gen);
        // Exact grid values exercise the strict comparison.
        z[0] = 1.5;
        z[1] = 0.0;
        for (double fp : {0.01, 0.05, 0.2}) CHECK(sweep_beta(z, fp) == brute_beta(z, fp));
    }
    CHECK(sweep_beta(std::vector<double>(10, -20.0), 0.01) == -10.0);
    try {
        sweep_beta(std::vector<double>(10, 20.0), 0.05);
        FAIL("expected TargetUnreachable");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::TargetUnreachable);
    }
    CHECK_THROWS_AS(compute_beta(std::vector<double>(99, 0.0), 0.05), Error);
    CHECK_THROWS_AS(sweep_beta(std::vector<double>(10, 0.0), 0.0), Error);
}

TEST_CASE("interval exploration ranks by p0 within the budget") {
    const auto s = uniform_samples(5000, -1.0, 1.0, 12);
    auto tri = s;
    for (auto& v : tri) v = std::max(-1.0, std::min(1.0, v * std::abs(v))); // mass piles up near 0
    const auto h = build_histogram(tri, -1.0, 1.0);
    const std::vector<double> widths{0.08, 0.15};
    const auto ranked = explore_intervals(h, widths, {});
    REQUIRE_FALSE(ranked.empty());
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].p0 <= ranked[i].p0);
    for (const auto& c : ranked) {
        CHECK(c.expected_samples <= 10.0);
        CHECK(c.expected_samples == doctest::Approx(1.0 / c.p0));
    }
    ExploreOptions tight;
    tight.budget = 2.0;
    CHECK(explore_intervals(h, widths, tight).size() < ranked.size());
}

TEST_CASE("calibration from human documents round-trips through a file") {
    EmbedderSpec spec;
    spec.dim = 32;
    SyntheticEmbedder embedder(spec);
    std::vector<std::string> texts;
    std::mt19937_64 gen(2);
    for (int d = 0; d < 120; ++d) {
        std::string t;
        for (int s = 0; s < 10; ++s) t += "Word" + std::to_string(gen() % 100000) + " and tok" + std::to_string(gen() % 1000) + ". ";
        texts.push_back(t);
    }
    texts.push_back("   ");
    DetectorConfig cfg;
    cfg.interval = Interval(0.0, 0.1);
    const std::vector<double> fps{0.01, 0.05};
    const auto model = calibrate(cfg, embedder, texts, fps, "unit-corpus");
    CHECK(model.documents == 120);
    CHECK(model.p0 > 0.05);
    CHECK(model.p0 < 0.4);
    CHECK(model.beta_for(0.01) >= model.beta_for(0.05));
    CHECK_THROWS_AS(model.beta_for(0.02), Error);
    CHECK(model.model_id == "synthetic");

    testing::TempDir dir("cal");
    save_calibration(model, dir.file("cal.json"));
    const auto loaded = load_calibration(dir.file("cal.json"));
    CHECK(loaded.p0 == model.p0);
    CHECK(loaded.beta_table == model.beta_table);
    CHECK(loaded.histogram.counts == model.histogram.counts);
    CHECK(loaded.corpus_id == "unit-corpus");
    CHECK(loaded.interval == cfg.interval);

    cfg.decay = DecayFactor::hard();
    auto hard = model;
    hard.decay = cfg.decay.K;
    save_calibration(hard, dir.file("hard.json"));
    CHECK(std::isinf(load_calibration(dir.file("hard.json")).decay));
}
