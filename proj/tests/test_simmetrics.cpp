#include <doctest.h>

#include <cmath>
#include <random>

#include "simmark/error.hpp"
#include "simmark/presets.hpp"
#include "simmark/simmetrics.hpp"

using namespace simmark;

TEST_CASE("cosine and euclidean on small vectors") {
    Eigen::Vector2d x(1, 0), y(0, 1), z(3, 4), o(0, 0);
    CHECK(cosine_similarity(x, y) == doctest::Approx(0.0));
    CHECK(cosine_similarity(x, x) == 1.0);
    CHECK(cosine_similarity(x, Eigen::Vector2d(-2, 0)) == -1.0);
    CHECK(euclidean_distance(o, z) == 5.0);
    CHECK(similarity(SimilarityMeasure::Euclidean, o, z) == 5.0);

    // Floating error never escapes [-1, 1].
    Eigen::VectorXd v = Eigen::VectorXd::Constant(97, 0.1);
    CHECK(cosine_similarity(v, v) <= 1.0);
}

TEST_CASE("similarity errors") {
    const Eigen::VectorXd x = Eigen::Vector2d(1, 0);
    const Eigen::VectorXd w = Eigen::Vector3d(1, 0, 0);
    CHECK_THROWS_AS(cosine_similarity(x, w), Error);
    CHECK_THROWS_AS(euclidean_distance(x, w), Error);
    try {
        cosine_similarity(x, Eigen::VectorXd::Zero(2));
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ZeroVector);
    }
}

TEST_CASE("soft count values") {
    const Interval iv(0.68, 0.76);
    const DecayFactor k250;
    CHECK(soft_count(0.68, iv, k250) == 1.0);
    CHECK(soft_count(0.76, iv, k250) == 1.0);
    CHECK(soft_count(0.72, iv, k250) == 1.0);
    // 0.01 below a, 0.02 above b
    CHECK(std::abs(soft_count(0.67, iv, k250) - std::exp(-2.5)) < 1e-12);
    CHECK(std::abs(soft_count(0.78, iv, k250) - std::exp(-5.0)) < 1e-12);
    CHECK(soft_count(0.67, iv, DecayFactor::hard()) == 0.0);
    CHECK(soft_count(0.67f, iv, k250) == doctest::Approx(std::exp(-2.5)).epsilon(1e-5));
}

TEST_CASE("soft count dominates hard count and decays with K and distance") {
    const Interval iv(0.1, 0.3);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double s = unif(gen);
        const double soft = soft_count(s, iv, DecayFactor{});
        CHECK(soft >= hard_count(s, iv));
        CHECK(soft <= 1.0);
        CHECK(soft_count(s, iv, DecayFactor(500.0)) <= soft);
    }
    double prev = 1.0;
    for (double s = 0.3; s < 0.6; s += 0.01) {
        const double c = soft_count(s, iv, DecayFactor{});
        CHECK(c <= prev);
        prev = c;
    }
}

TEST_CASE("interval and decay validation") {
    CHECK_THROWS_AS(Interval(0.5, 0.5), Error);
    CHECK_THROWS_AS(Interval(0.6, 0.5), Error);
    CHECK_THROWS_AS(Interval(0.0, INFINITY), Error);
    CHECK_THROWS_AS(DecayFactor(0.0), Error);
    CHECK_THROWS_AS(DecayFactor(-1.0), Error);
    CHECK(std::isinf(DecayFactor::hard().K));
}

TEST_CASE("built-in interval presets") {
    CHECK(find_preset("cosine").interval == Interval(0.68, 0.76));
    CHECK(find_preset("cosine-pca").interval == Interval(0.81, 0.94));
    CHECK(find_preset("euclidean").interval == Interval(0.40, 0.55));
    CHECK(find_preset("euclidean-pca").interval == Interval(0.28, 0.36));
    CHECK(find_preset("gemma-cosine").interval == Interval(0.86, 0.90));
    CHECK(find_preset("gemma-euclidean-pca").interval == Interval(0.11, 0.16));
    CHECK(default_preset(SimilarityMeasure::Euclidean, true).name == "euclidean-pca");
    CHECK_THROWS_AS(find_preset("nope"), Error);
    CHECK(parse_measure("euclidean") == SimilarityMeasure::Euclidean);
    CHECK_THROWS_AS(parse_measure("manhattan"), Error);
}
