#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simmark/attacks.hpp"
#include "simmark/calibration.hpp"
#include "simmark/evaluation.hpp"
#include "simmark/generation.hpp"

namespace simmark {

/// Desk-scale stand-in for corpus experiments. Sentences are random
/// pseudo-word strings, the embedder is the synthetic one, and watermarked
/// documents go through the real rejection-sampling loop. Consecutive
/// sentences share no words, so their cosine similarity follows the
/// random-direction law of the embedding dimension, modelled here as a
/// Gaussian N(0, 1/dim) truncated to [-1, 1].
struct SimulationConfig {
    int embed_dim = 32;
    /// Target human mass inside the interval.
    double p0 = 0.194;
    /// Quantile of the human similarity law where the interval starts.
    double interval_lower_quantile = 0.5;
    /// Overrides the quantile placement when set.
    std::optional<Interval> interval;

    std::size_t n_calibration = 500;
    std::size_t n_human = 500;
    std::size_t n_watermarked = 500;
    std::size_t sentences_per_doc = 20;
    int words_min = 8;
    int words_max = 16;

    DecayFactor decay;
    int n_max = 100;
    std::size_t min_sentences = 8;
    std::vector<double> fp_targets{0.01, 0.05};

    /// Gaussian noise added to watermarked pair similarities (paraphrase stand-in).
    double perturb_sigma = 0.0;
    double drop_p = 0.0;
    double merge_p = 0.0;

    /// Virtual cost of one generator candidate, used for latency figures.
    double candidate_cost_ms = 1.0;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;

    void validate() const;
};

SimulationConfig simulation_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SimulationConfig& config);

/// Interval of human mass `p0` starting at `interval_lower_quantile`.
Interval simulation_interval(const SimulationConfig& config);

/// Mass of the truncated Gaussian human model inside `interval`.
double model_interval_mass(const SimulationConfig& config, const Interval& interval);

/// Random capitalised pseudo-word sentence ending in a period.
std::string random_sentence(std::uint64_t& state, int words_min, int words_max);

/// Scripted generator: each completion is a fresh random sentence followed by a trailing fragment.
class RandomSentenceGenerator final : public TextGenerator {
public:
    RandomSentenceGenerator(std::uint64_t seed, int words_min, int words_max);
    std::vector<std::string> complete(const GenerationRequest& request) override;

private:
    std::uint64_t state_;
    int words_min_;
    int words_max_;
};

/// Scripted paraphraser replacing each word with probability `swap_rate`.
/// Candidate i of a sentence depends only on (seed, sentence, i).
class WordSwapParaphraser final : public Paraphraser {
public:
    WordSwapParaphraser(std::uint64_t seed, double swap_rate);
    std::vector<std::string> paraphrase(const ParaphraseRequest& request) override;

private:
    std::uint64_t seed_;
    double swap_rate_;
};

/// Unwatermarked documents of `sentences_per_doc + 1` random sentences (the first is the prompt).
std::vector<std::string> synthesize_human_texts(const SimulationConfig& config, std::uint64_t seed,
                                                std::size_t count);

struct WatermarkedDocument {
    GenerationTrace trace;
    std::string text;
};

std::vector<WatermarkedDocument> synthesize_watermarked(const SimulationConfig& config, std::uint64_t seed,
                                                        std::size_t count, Embedder& embedder,
                                                        const Interval& interval);

/// Pair similarities of every text, computed in parallel.
std::vector<std::vector<double>> corpus_similarities(const DetectorConfig& config, Embedder& embedder,
                                                     const std::vector<std::string>& texts, unsigned threads = 0);

/// The embedder the simulation uses for a given root seed.
EmbedderSpec simulation_embedder_spec(const SimulationConfig& config, std::uint64_t seed);

struct SimulationResult {
    EvalSummary summary;
    Interval interval;
    /// Human interval mass under the truncated Gaussian model.
    double model_p0 = 0.0;
    CalibrationModel calibration;
    ScoredCorpus scores;
    std::size_t generator_calls = 0;
};

nlohmann::json to_json(const SimulationResult& result);

SimulationResult run_simulation_study(const SimulationConfig& config, std::uint64_t seed);

/// Runs fn(i) for i in [0, n) on `threads` workers; rethrows the first exception.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace simmark
