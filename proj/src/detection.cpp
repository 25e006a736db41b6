#include "simmark/detection.hpp"

#include <cmath>

namespace simmark {

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::Watermarked: return "watermarked";
    case Verdict::Human: return "human";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

void DetectorConfig::validate_scoring() const {
    if (use_pca && !pca) throw Error(Errc::InvalidConfig, "use_pca is set but no PCA model is loaded");
}

void DetectorConfig::validate() const {
    validate_scoring();
    if (!(p0 > 0.0 && p0 < 1.0)) throw Error(Errc::InvalidP0, "p0 must be calibrated into (0, 1)");
    if (!std::isfinite(beta)) throw Error(Errc::InvalidConfig, "beta must be calibrated");
}

nlohmann::json to_json(const DetectionReport& r) {
    return {{"N", r.N},
            {"similarities", r.similarities},
            {"soft_counts", r.soft_counts},
            {"N_valid_soft", r.n_valid_soft},
            {"p0", r.p0},
            {"z_soft", r.z_soft},
            {"beta", r.beta},
            {"verdict", to_string(r.verdict)}};
}

double z_soft(double n_valid_soft, double p0, std::size_t N) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw Error(Errc::InvalidP0, "p0 must lie in (0, 1)");
    if (N == 0) throw Error(Errc::TooShort, "z_soft needs at least one scored sentence");
    const double n = static_cast<double>(N);
    return (n_valid_soft - p0 * n) / std::sqrt(p0 * (1.0 - p0) * n);
}

std::vector<double> pair_similarities(const DetectorConfig& config, Embedder& embedder,
                                      const SentenceSequence& seq) {
    config.validate_scoring();
    if (seq.size() < 2) return {};
    const auto pairs = consecutive_pairs(seq);
    const std::size_t first = pairs.front().anchor.index;
    std::vector<std::string> texts;
    for (std::size_t i = first; i < seq.size(); ++i) texts.push_back(seq[i].text);
    std::vector<Embedding> vectors = embedder.embed(texts);
    if (config.use_pca)
        for (auto& v : vectors) v = pca_transform(*config.pca, v);
    std::vector<double> sims;
    sims.reserve(pairs.size());
    for (std::size_t i = 0; i + 1 < vectors.size(); ++i)
        sims.push_back(similarity(config.measure, vectors[i], vectors[i + 1]));
    return sims;
}

DetectionReport score_similarities(const DetectorConfig& config, std::span<const double> similarities) {
    config.validate();
    DetectionReport report;
    report.N = similarities.size();
    report.p0 = config.p0;
    report.beta = config.beta;
    report.similarities.assign(similarities.begin(), similarities.end());
    report.soft_counts.reserve(similarities.size());
    for (double s : similarities) {
        const double c = soft_count(s, config.interval, config.decay);
        report.soft_counts.push_back(c);
        report.n_valid_soft += c;
    }
    if (report.N == 0) {
        report.verdict = Verdict::Inconclusive;
        return report;
    }
    report.z_soft = z_soft(report.n_valid_soft, config.p0, report.N);
    if (report.N < config.min_sentences) {
        report.verdict = Verdict::Inconclusive;
    } else {
        report.verdict = report.z_soft > config.beta ? Verdict::Watermarked : Verdict::Human;
    }
    return report;
}

DetectionReport detect(const DetectorConfig& config, Embedder& embedder, std::string_view text) {
    config.validate();
    const SentenceSequence seq = split_sentences(text);
    const auto sims = pair_similarities(config, embedder, seq);
    return score_similarities(config, sims);
}

} // namespace simmark
