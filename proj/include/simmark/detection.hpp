#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simmark/embedding.hpp"
#include "simmark/projection.hpp"
#include "simmark/segmentation.hpp"
#include "simmark/simmetrics.hpp"

namespace simmark {

enum class Verdict { Watermarked, Human, Inconclusive };

std::string_view to_string(Verdict v) noexcept;

struct DetectorConfig {
    Interval interval;
    SimilarityMeasure measure = SimilarityMeasure::Cosine;
    bool use_pca = false;
    std::shared_ptr<const PcaModel> pca;
    DecayFactor decay;
    /// Expected valid fraction in human text. Comes from calibration.
    double p0 = std::numeric_limits<double>::quiet_NaN();
    /// z_soft threshold. Comes from calibration.
    double beta = std::numeric_limits<double>::quiet_NaN();
    /// Fewer scored sentences than this gives an inconclusive verdict.
    std::size_t min_sentences = 8;

    /// Checks the fields needed to score similarities (interval, PCA presence).
    void validate_scoring() const;
    /// Additionally requires calibrated p0 and beta.
    void validate() const;
};

struct DetectionReport {
    /// Scored sentences, i.e. the number of consecutive pairs.
    std::size_t N = 0;
    std::vector<double> similarities;
    std::vector<double> soft_counts;
    double n_valid_soft = 0.0;
    double p0 = 0.0;
    double z_soft = 0.0;
    double beta = 0.0;
    Verdict verdict = Verdict::Inconclusive;

    bool operator==(const DetectionReport&) const = default;
};

nlohmann::json to_json(const DetectionReport& report);

/// (n_valid_soft - p0 N) / sqrt(p0 (1 - p0) N). Throws InvalidP0 unless 0 < p0 < 1.
double z_soft(double n_valid_soft, double p0, std::size_t N);

/// Similarity of every consecutive pair, the last prompt sentence anchoring the first pair.
/// Returns an empty list for single-sentence input.
std::vector<double> pair_similarities(const DetectorConfig& config, Embedder& embedder, const SentenceSequence& seq);

/// Soft counts and z-test over precomputed pair similarities.
DetectionReport score_similarities(const DetectorConfig& config, std::span<const double> similarities);

/// Full detection of one text. Too-short inputs yield an inconclusive report.
DetectionReport detect(const DetectorConfig& config, Embedder& embedder, std::string_view text);

} // namespace simmark
