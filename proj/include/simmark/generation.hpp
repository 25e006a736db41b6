#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "simmark/embedding.hpp"
#include "simmark/error.hpp"
#include "simmark/http_client.hpp"
#include "simmark/projection.hpp"
#include "simmark/segmentation.hpp"
#include "simmark/simmetrics.hpp"

namespace simmark {

struct LlmSamplingParams {
    double temperature = 0.7;
    double repetition_penalty = 1.05;
    int min_new_tokens = 195;
    int max_new_tokens = 205;

    void validate() const;
};

struct GenerationRequest {
    std::string model_id;
    std::string prompt;
    LlmSamplingParams sampling;
    int n = 1;
};

/// Black-box text continuation source. Implementations must be deterministic
/// given their construction arguments and call sequence.
class TextGenerator {
public:
    virtual ~TextGenerator() = default;
    virtual std::vector<std::string> complete(const GenerationRequest& request) = 0;
};

/// Client for POST {endpoint}/v1/generate. When the endpoint rejects the
/// prompt as too long (HTTP 413) the prompt is cut to its last
/// `max_context_tokens` whitespace tokens and sent once more.
class RemoteGenerator final : public TextGenerator {
public:
    RemoteGenerator(std::string endpoint, http::RetryPolicy policy, std::size_t max_context_tokens = 1024);
    std::vector<std::string> complete(const GenerationRequest& request) override;

private:
    std::string endpoint_;
    http::RetryPolicy policy_;
    std::size_t max_context_tokens_;
};

/// Calls a user function; used by tests and the simulation study.
class ScriptedGenerator final : public TextGenerator {
public:
    using Script = std::function<std::string(const GenerationRequest&, std::size_t call)>;
    explicit ScriptedGenerator(Script script) : script_(std::move(script)) {}

    std::vector<std::string> complete(const GenerationRequest& request) override;
    /// Number of completions produced so far.
    std::size_t calls() const noexcept { return calls_; }

private:
    Script script_;
    std::size_t calls_ = 0;
};

struct GeneratorConfig {
    Interval interval;
    SimilarityMeasure measure = SimilarityMeasure::Cosine;
    bool use_pca = false;
    std::shared_ptr<const PcaModel> pca;
    /// Candidates sampled per sentence before the last one is accepted regardless.
    int n_max = 100;
    /// Candidates requested per generator call. Acceptance still follows candidate order.
    int candidates_per_round = 1;
    LlmSamplingParams sampling;
    std::string llm_endpoint;
    std::string model_id;

    void validate() const;
};

struct TraceEntry {
    std::string text;
    int attempts = 0;
    double final_similarity = 0.0;
    bool accepted_in_interval = false;
    std::int64_t wall_ms = 0;
};

struct GenerationTrace {
    std::vector<std::string> prompt_sentences;
    std::vector<TraceEntry> entries;
    std::size_t generator_calls = 0;

    /// Prompt followed by the accepted sentences, space separated.
    std::string text() const;
};

nlohmann::json to_json(const GenerationTrace& trace);

/// Milliseconds from an arbitrary origin.
using Clock = std::function<std::int64_t()>;
Clock steady_clock_ms();

/// First sentence of a continuation, or nullopt when nothing usable remains.
std::optional<std::string> extract_first_sentence(std::string_view continuation);

template <class Candidate>
struct SampledCandidate {
    Candidate candidate;
    double similarity = 0.0;
    int attempts = 0;
    bool in_interval = false;
};

/// The acceptance loop shared by real generation and simulated acceptance.
/// `draw(count)` returns up to `count` fresh candidates; `score(candidate)`
/// gives its similarity or nullopt when the candidate is unusable. Candidates
/// are examined in draw order until one scores inside `interval` or `n_max`
/// have been examined; in the latter case the last usable one is kept.
template <class Draw, class Score>
auto rejection_sample(const Interval& interval, int n_max, int per_round, Draw&& draw, Score&& score)
    -> SampledCandidate<typename std::invoke_result_t<Draw&, int>::value_type> {
    using Candidate = typename std::invoke_result_t<Draw&, int>::value_type;
    std::optional<SampledCandidate<Candidate>> last;
    int attempts = 0;
    while (attempts < n_max) {
        const int want = std::min(per_round, n_max - attempts);
        auto round = draw(want);
        if (round.empty()) throw Error(Errc::CandidateEmpty, "generator returned no candidates");
        for (auto& candidate : round) {
            if (attempts == n_max) break;
            ++attempts;
            const std::optional<double> s = score(candidate);
            if (!s) continue;
            last = SampledCandidate<Candidate>{std::move(candidate), *s, attempts, interval.contains(*s)};
            if (last->in_interval) return *last;
        }
    }
    if (!last) throw Error(Errc::CandidateEmpty, "no usable candidate after " + std::to_string(n_max) + " attempts");
    last->attempts = attempts;
    return *last;
}

/// Samples and accepts the sentence following `context`.
std::pair<Sentence, TraceEntry> generate_next_sentence(const GeneratorConfig& config, TextGenerator& generator,
                                                       Embedder& embedder, const SentenceSequence& context,
                                                       const Clock& clock = steady_clock_ms());

/// Segments `prompt`, then appends `n_sentences` watermarked sentences.
GenerationTrace generate_document(const GeneratorConfig& config, TextGenerator& generator, Embedder& embedder,
                                  std::string_view prompt, int n_sentences, const Clock& clock = steady_clock_ms());

/// Runs the acceptance loop with candidates that are valid with probability
/// `p`, returning the attempts used for each of `sentences` sentences.
std::vector<int> simulate_bernoulli_attempts(double p, int n_max, std::size_t sentences, std::uint64_t seed);

} // namespace simmark
