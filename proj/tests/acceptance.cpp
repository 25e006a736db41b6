// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "simmark/attacks.hpp"
#include "simmark/calibration.hpp"
#include "simmark/detection.hpp"
#include "simmark/evaluation.hpp"
#include "simmark/generation.hpp"
#include "simmark/projection.hpp"
#include "simmark/simulation.hpp"
#include "support.hpp"

using namespace simmark;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void criterion(const char* name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %-34s %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++g_failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

/// Detector calibrated on a fresh human corpus, as the simulation does it.
DetectorConfig calibrated_detector(const SimulationConfig& sim, Embedder& embedder, const Interval& interval,
                                   std::uint64_t seed, double fp) {
    DetectorConfig det;
    det.interval = interval;
    det.decay = sim.decay;
    det.min_sentences = sim.min_sentences;
    const auto texts = synthesize_human_texts(sim, seed, sim.n_calibration);
    const auto sims = corpus_similarities(det, embedder, texts, sim.threads);
    const std::vector<double> fps{fp};
    const auto model = calibrate_from_similarities(det, sims, fps);
    det.p0 = model.p0;
    det.beta = model.beta_for(fp);
    return det;
}

double mean_z(const DetectorConfig& det, Embedder& embedder, const std::vector<std::string>& texts) {
    double sum = 0.0;
    for (const auto& t : texts) sum += detect(det, embedder, t).z_soft;
    return sum / static_cast<double>(texts.size());
}

} // namespace

int main() {
    criterion("soft count scalars", [] {
        const Interval iv(0.68, 0.76);
        const double off = std::abs(soft_count(0.67, iv, DecayFactor(250.0)) - std::exp(-2.5));
        const bool edge = soft_count(0.68, iv, DecayFactor(250.0)) == 1.0 && soft_count(0.76, iv, DecayFactor(250.0)) == 1.0;
        return Outcome{off < 1e-12 && edge, fmt("|c(0.67) - e^-2.5| = %.3g, boundary = 1", off)};
    });

    criterion("z statistic scalars", [] {
        const double z = z_soft(16.0, 0.2, 20);
        const double off = std::abs(z - 6.708203932499369);
        const double null_z = std::abs(z_soft(0.2 * 20, 0.2, 20));
        return Outcome{off < 1e-9 && null_z <= 1e-12, fmt("z(16, 0.2, 20) = %.12f", z) + fmt(", null |z| = %.3g", null_z)};
    });

    criterion("geometric sampling cost", [] {
        const auto attempts = simulate_bernoulli_attempts(0.194, 100, 10000, 20240601);
        const double mean = std::accumulate(attempts.begin(), attempts.end(), 0.0) / attempts.size();
        return Outcome{mean >= 4.6 && mean <= 5.6, fmt("mean attempts = %.4f, expected in [4.6, 5.6]", mean)};
    });

    criterion("calibration FP control", [] {
        SimulationConfig sim;
        sim.n_calibration = 5000;
        const Interval interval = simulation_interval(sim);
        SyntheticEmbedder embedder(simulation_embedder_spec(sim, 11));
        DetectorConfig det;
        det.interval = interval;
        const auto cal_sims = corpus_similarities(det, embedder, synthesize_human_texts(sim, 101, 5000), sim.threads);
        const auto held_sims = corpus_similarities(det, embedder, synthesize_human_texts(sim, 202, 5000), sim.threads);
        const std::vector<double> fps{0.01, 0.05};
        const auto model = calibrate_from_similarities(det, cal_sims, fps);
        det.p0 = model.p0;
        bool ok = true;
        std::string detail = fmt("p0 = %.4f", model.p0);
        for (double fp : fps) {
            det.beta = model.beta_for(fp);
            std::size_t flagged = 0;
            for (const auto& s : held_sims) flagged += score_similarities(det, s).z_soft > det.beta;
            const double rate = static_cast<double>(flagged) / static_cast<double>(held_sims.size());
            ok = ok && rate <= fp + 0.01;
            detail += fmt(", target %.2f", fp) + fmt(" -> held-out FP %.4f", rate);
        }
        return Outcome{ok, detail};
    });

    criterion("end-to-end separation", [] {
        const SimulationConfig sim; // 500 + 500 documents of 20 sentences
        const auto r = run_simulation_study(sim, 1);
        const double auc = r.summary.roc_auc;
        const double tp = r.summary.tp_at_fp.at(0.05);
        return Outcome{auc >= 0.99 && tp >= 0.98,
                       fmt("AUC = %.4f", auc) + fmt(", TP@5%% = %.4f", tp) + fmt(", mean attempts = %.3f", *r.summary.mean_attempts)};
    });

    criterion("soft vs hard robustness", [] {
        auto run = [](double sigma, DecayFactor decay) {
            SimulationConfig sim;
            sim.perturb_sigma = sigma;
            sim.decay = decay;
            return run_simulation_study(sim, 3).summary.roc_auc;
        };
        const double soft_noisy = run(0.03, DecayFactor(250.0));
        const double hard_noisy = run(0.03, DecayFactor::hard());
        const double soft_clean = run(0.0, DecayFactor(250.0));
        const double hard_clean = run(0.0, DecayFactor::hard());
        const bool ok = soft_noisy >= hard_noisy && hard_clean >= soft_clean - 0.005;
        return Outcome{ok, fmt("sigma=0.03: soft %.4f", soft_noisy) + fmt(" vs hard %.4f", hard_noisy) +
                               fmt("; sigma=0: soft %.4f", soft_clean) + fmt(" vs hard %.4f", hard_clean)};
    });

    criterion("attack identities and drop trend", [] {
        SimulationConfig sim;
        sim.n_calibration = 500;
        const Interval interval = simulation_interval(sim);
        SyntheticEmbedder embedder(simulation_embedder_spec(sim, 5));
        const auto det = calibrated_detector(sim, embedder, interval, 51, 0.05);
        std::vector<std::string> texts = synthesize_human_texts(sim, 52, 50);
        for (auto& d : synthesize_watermarked(sim, 53, 50, embedder, interval)) texts.push_back(d.text);

        std::size_t unchanged = 0;
        for (std::size_t i = 0; i < texts.size(); ++i) {
            AttackSpec drop;
            drop.kind = AttackKind::Drop;
            drop.rng_seed = i;
            AttackSpec merge = drop;
            merge.kind = AttackKind::Merge;
            const auto base = detect(det, embedder, texts[i]);
            const bool same = detect(det, embedder, drop_attack(drop, split_sentences(texts[i])).join()) == base &&
                              detect(det, embedder, merge_attack(merge, texts[i])) == base;
            unchanged += same;
        }

        std::vector<double> aucs;
        for (double p : {0.0, 0.25, 0.5}) {
            SimulationConfig s = sim;
            s.drop_p = p;
            aucs.push_back(run_simulation_study(s, 4).summary.roc_auc);
        }
        const bool trend = aucs[1] <= aucs[0] && aucs[2] <= aucs[1];
        return Outcome{unchanged == texts.size() && trend,
                       std::to_string(unchanged) + "/" + std::to_string(texts.size()) + " reports unchanged at p=0" +
                           fmt("; drop AUC %.4f", aucs[0]) + fmt(" -> %.4f", aucs[1]) + fmt(" -> %.4f", aucs[2])};
    });

    criterion("ROC oracle equivalence", [] {
        std::mt19937_64 gen(99);
        std::uniform_int_distribution<int> size(1, 50);
        std::uniform_int_distribution<int> level(0, 12);
        std::size_t equal = 0;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> h(size(gen)), w(size(gen));
            for (auto& x : h) x = level(gen) * 0.25;
            for (auto& x : w) x = level(gen) * 0.25 + 0.5;
            double wins = 0.0;
            for (double a : w)
                for (double b : h) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
            equal += roc_auc(h, w) == wins / (static_cast<double>(w.size()) * static_cast<double>(h.size()));
        }
        return Outcome{equal == 100, std::to_string(equal) + "/100 corpora match the pairwise count exactly"};
    });

    criterion("PCA properties", [] {
        std::mt19937_64 gen(17);
        std::normal_distribution<double> normal;
        Eigen::MatrixXd x(300, 24);
        for (int j = 0; j < x.cols(); ++j)
            for (int i = 0; i < x.rows(); ++i) x(i, j) = normal(gen) / (1.0 + 0.3 * j);
        double worst_ortho = 0.0;
        bool monotone = true;
        double prev = INFINITY;
        for (int k = 1; k < 24; ++k) {
            const auto m = pca_fit(x, k);
            worst_ortho = std::max(
                worst_ortho, (m.components * m.components.transpose() - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
            const double err = reconstruction_error(m, x);
            monotone = monotone && err <= prev;
            prev = err;
        }
        testing::TempDir dir("accept-pca");
        auto model = pca_fit(x, 16);
        model.model_id = "synthetic";
        save_pca(model, dir.file("pca.json"));
        const auto loaded = load_pca(dir.file("pca.json"));
        bool identical = true;
        for (int i = 0; i < x.rows(); ++i) {
            const Eigen::VectorXd v = x.row(i).transpose();
            identical = identical && pca_transform(loaded, v) == pca_transform(model, v);
        }
        return Outcome{worst_ortho <= 1e-9 && monotone && identical,
                       fmt("max |VV^T - I| = %.3g", worst_ortho) + (monotone ? ", error monotone" : ", error NOT monotone") +
                           (identical ? ", reload bit-identical" : ", reload differs")};
    });

    criterion("bigram adversary effectiveness", [] {
        SimulationConfig sim;
        sim.n_calibration = 500;
        const Interval interval = simulation_interval(sim);
        SyntheticEmbedder embedder(simulation_embedder_spec(sim, 8));
        const auto det = calibrated_detector(sim, embedder, interval, 81, 0.05);
        const auto docs = synthesize_watermarked(sim, 82, 50, embedder, interval);

        WordSwapParaphraser paraphraser(83, 0.3);
        AttackSpec plain;
        plain.kind = AttackKind::Paraphrase;
        AttackSpec bigram;
        bigram.kind = AttackKind::Bigram;
        bigram.n_candidates = 10;
        std::vector<std::string> original, plain_out, bigram_out;
        for (const auto& d : docs) {
            const auto seq = split_sentences(d.text);
            original.push_back(d.text);
            plain_out.push_back(paraphrase_document(plain, paraphraser, seq).sequence.join());
            bigram_out.push_back(bigram_attack(bigram, paraphraser, seq, det, embedder).sequence.join());
        }
        const double z0 = mean_z(det, embedder, original);
        const double zp = mean_z(det, embedder, plain_out);
        const double zb = mean_z(det, embedder, bigram_out);
        return Outcome{zb <= zp, fmt("mean z: unattacked %.3f", z0) + fmt(", paraphrase %.3f", zp) + fmt(", bigram %.3f", zb)};
    });

    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
