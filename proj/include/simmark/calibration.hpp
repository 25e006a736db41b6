#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "simmark/detection.hpp"
#include "simmark/simmetrics.hpp"

namespace simmark {

inline constexpr std::size_t kHistogramBins = 1000;
inline constexpr std::size_t kMinHistogramSamples = 100;
inline constexpr std::size_t kMinBetaScores = 100;
/// p0 is kept inside [kP0Clamp, 1 - kP0Clamp] so the z-test stays finite.
inline constexpr double kP0Clamp = 1e-6;
inline constexpr double kBetaGridLo = -10.0;
inline constexpr double kBetaGridHi = 10.0;
inline constexpr double kBetaGridStep = 0.001;

struct SimilarityHistogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> edges;          // kHistogramBins + 1
    std::vector<std::uint64_t> counts;  // kHistogramBins
    std::uint64_t total = 0;

    double bin_width() const noexcept { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Equal-width bins over [lo, hi]; samples outside fall into the nearest edge bin.
SimilarityHistogram build_histogram(std::span<const double> similarities, double lo, double hi);

/// (-1, 1) for cosine; (0, 1.1 * max) for Euclidean distance.
std::pair<double, double> default_histogram_range(SimilarityMeasure measure, std::span<const double> similarities);

/// Histogram mass inside [a, b], with partially covered bins counted by overlap fraction.
double interval_mass(const SimilarityHistogram& hist, const Interval& interval);

/// interval_mass clamped to [kP0Clamp, 1 - kP0Clamp]. Throws NoOverlap when the
/// interval misses the histogram range.
double estimate_p0(const SimilarityHistogram& hist, const Interval& interval);

/// Smallest beta on the grid -10, -9.999, ..., 10 with fraction(z > beta) <= fp_target.
/// Throws TargetUnreachable when even beta = 10 leaves too many scores above.
double sweep_beta(std::span<const double> z_scores, double fp_target);

/// sweep_beta with the calibration-size requirement (at least kMinBetaScores scores).
double compute_beta(std::span<const double> human_z_scores, double fp_target);

struct IntervalCandidate {
    Interval interval;
    double p0 = 0.0;
    double expected_samples = 0.0;
};

struct ExploreOptions {
    /// Candidates needing more expected samples per sentence are dropped.
    double budget = 10.0;
    /// Placement step; zero means 1% of the histogram range.
    double step = 0.0;
    /// Similarities of the unwatermarked generator; the human histogram stands in when absent.
    const SimilarityHistogram* generator_hist = nullptr;
};

/// p0 of `interval` and the mean of the geometric number of draws needed to land in it.
IntervalCandidate evaluate_interval(const SimilarityHistogram& human_hist, const Interval& interval,
                                    const SimilarityHistogram* generator_hist = nullptr);

/// Slides intervals of each width across the histogram range and ranks the
/// placements by ascending p0 (ties: fewer expected samples), keeping only
/// those within the sampling budget.
std::vector<IntervalCandidate> explore_intervals(const SimilarityHistogram& human_hist,
                                                 std::span<const double> candidate_widths,
                                                 const ExploreOptions& options = {});

struct CalibrationModel {
    SimilarityHistogram histogram;
    double p0 = 0.0;
    std::map<double, double> beta_table;
    std::string corpus_id;
    std::string model_id;
    std::string instruction;
    SimilarityMeasure measure = SimilarityMeasure::Cosine;
    bool use_pca = false;
    Interval interval;
    double decay = 250.0;
    std::size_t documents = 0;

    /// Beta for an exact FP target present in the table; throws InvalidConfig otherwise.
    double beta_for(double fp_target) const;
};

nlohmann::json to_json(const SimilarityHistogram& hist);
SimilarityHistogram histogram_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CalibrationModel& model);
CalibrationModel calibration_from_json(const nlohmann::json& j);
void save_calibration(const CalibrationModel& model, const std::string& path);
CalibrationModel load_calibration(const std::string& path);

/// Calibrates from per-document pair similarities of a human corpus. All
/// similarities feed the histogram; documents with at least
/// `config.min_sentences` pairs feed the beta sweep.
CalibrationModel calibrate_from_similarities(const DetectorConfig& config,
                                             std::span<const std::vector<double>> doc_similarities,
                                             std::span<const double> fp_targets);

/// Segments and embeds each human text, then calibrates.
CalibrationModel calibrate(const DetectorConfig& config, Embedder& embedder, std::span<const std::string> human_texts,
                           std::span<const double> fp_targets, const std::string& corpus_id);

} // namespace simmark
