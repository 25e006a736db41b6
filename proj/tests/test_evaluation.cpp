#include <doctest.h>

#include <cmath>
#include <random>

#include "simmark/error.hpp"
#include "simmark/evaluation.hpp"

using namespace simmark;

namespace {

double brute_auc(const std::vector<double>& h, const std::vector<double>& w) {
    double wins = 0.0;
    for (double x : w)
        for (double y : h) wins += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
    return wins / (static_cast<double>(w.size()) * static_cast<double>(h.size()));
}

} // namespace

TEST_CASE("ROC-AUC equals the pairwise count, ties included") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> size(1, 50);
        std::uniform_int_distribution<int> coarse(-5, 5);
        std::normal_distribution<double> normal;
        std::vector<double> h(size(gen)), w(size(gen));
        const bool ties = trial % 2 == 0;
        for (auto& x : h) x = ties ? coarse(gen) : normal(gen);
        for (auto& x : w) x = ties ? coarse(gen) + 1 : normal(gen) + 0.5;
        CHECK(roc_auc(h, w) == brute_auc(h, w));
    }
    CHECK(roc_auc(std::vector<double>{0, 1}, std::vector<double>{2, 3}) == 1.0);
    CHECK(roc_auc(std::vector<double>{2, 3}, std::vector<double>{0, 1}) == 0.0);
    CHECK(roc_auc(std::vector<double>{1, 1}, std::vector<double>{1}) == 0.5);
    try {
        roc_auc(std::vector<double>{}, std::vector<double>{1.0});
        FAIL("expected MissingClass");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MissingClass);
    }
}

TEST_CASE("TP at FP uses the threshold swept on human scores") {
    std::vector<double> human;
    for (int i = 0; i < 100; ++i) human.push_back(i / 100.0); // 0.00 .. 0.99
    // 5% FP: smallest beta with at most 5 scores above is 0.94.
    const std::vector<double> wm{0.93, 0.94, 0.95, 2.0};
    CHECK(tp_at_fp(human, wm, 0.05) == 0.5);
    CHECK(tp_at_fp(human, wm, 0.5) == 1.0);
}

TEST_CASE("trigram entropy") {
    CHECK(ent3("a b c") == 0.0);
    CHECK(ent3("a b c d") == doctest::Approx(1.0));
    // abc twice, bca and cab once: -(1/2 log 1/2 + 2 * 1/4 log 1/4)
    CHECK(ent3("a b c a b c") == doctest::Approx(1.5).epsilon(1e-12));
    CHECK_THROWS_AS(ent3("a b"), Error);
}

TEST_CASE("scored corpus parsing and summary") {
    std::vector<nlohmann::json> rows;
    for (int i = 0; i < 120; ++i) rows.push_back({{"id", "h" + std::to_string(i)}, {"label", "human"}, {"z_soft", i / 100.0}});
    for (int i = 0; i < 10; ++i) rows.push_back({{"id", i}, {"label", "watermarked"}, {"z_soft", 5.0 + i}, {"N", 20}});
    const auto corpus = scored_corpus_from_jsonl(rows);
    CHECK(corpus.records.size() == 130);
    CHECK(corpus.records[120].id == "0");
    CHECK(corpus.records[125].N == 20);
    const auto summary = summarize(corpus);
    CHECK(summary.roc_auc == 1.0);
    CHECK(summary.tp_at_fp.at(0.01) == 1.0);
    CHECK(summary.tp_at_fp.at(0.05) == 1.0);
    const auto j = to_json(summary);
    CHECK(j["tp_at_fp"].contains("0.01"));
    CHECK(j["tp_at_fp"].contains("0.05"));
    CHECK(j["mean_attempts"].is_null());

    rows.push_back({{"label", "robot"}, {"z_soft", 1.0}});
    CHECK_THROWS_AS(scored_corpus_from_jsonl(rows), Error);
    CHECK(parse_label("watermarked") == Label::Watermarked);
}
