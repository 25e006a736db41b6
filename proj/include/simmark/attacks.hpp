#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simmark/detection.hpp"
#include "simmark/embedding.hpp"
#include "simmark/http_client.hpp"
#include "simmark/segmentation.hpp"

namespace simmark {

enum class AttackKind { Paraphrase, Bigram, Drop, Merge, Composed };

/// How the bigram adversary ranks candidate paraphrases.
enum class AdversaryMode {
    /// Knows the detector: picks the lowest soft count against the previous sentence.
    DetectorAware,
    /// Black box: picks the largest word-level edit distance from the original sentence.
    EditDistance,
};

/// What the detector-aware adversary minimises for each sentence.
enum class BigramObjective {
    /// Soft count of the candidate against the previously chosen sentence.
    SoftCount,
    /// Hard interval membership of the same pair (0 or 1).
    HardCount,
    /// z_soft of the rewritten prefix ending in the candidate; needs a calibrated p0.
    RunningZ,
};

std::string_view to_string(BigramObjective objective) noexcept;
BigramObjective parse_bigram_objective(std::string_view name);

namespace templates {
inline constexpr std::string_view kParaphrase =
    "Previous context: {context} \n Current sentence to paraphrase: {sent}";
inline constexpr std::string_view kBigram =
    "Previous context: {context} \n Paraphrase in {num_beams} different ways and return a numbered list: {sent}";
} // namespace templates

struct AttackSpec {
    AttackKind kind = AttackKind::Paraphrase;
    /// Steps of a composed attack, e.g. {Paraphrase, Drop}.
    std::vector<AttackKind> steps;
    std::string paraphraser_endpoint;
    int n_candidates = 10;
    /// Drop or merge probability.
    double p = 0.0;
    std::uint64_t rng_seed = 0;
    std::string prompt_template{templates::kParaphrase};
    std::string bigram_template{templates::kBigram};
    AdversaryMode mode = AdversaryMode::DetectorAware;
    BigramObjective objective = BigramObjective::SoftCount;
};

std::string_view to_string(AttackKind kind) noexcept;
/// "paraphrase", "bigram", "drop", "merge", or a '+'-joined composition such as "paraphrase+drop".
AttackSpec parse_attack_kind(std::string_view name);

/// Replaces {context}, {sent} and {num_beams}.
std::string render_template(std::string_view tmpl, std::string_view context, std::string_view sentence, int n);

struct ParaphraseRequest {
    std::string sentence;
    std::string context;
    int n = 1;
    /// Rendered prompt template, for paraphrasers driven by an instruction-following model.
    std::string prompt;
};

class Paraphraser {
public:
    virtual ~Paraphraser() = default;
    virtual std::vector<std::string> paraphrase(const ParaphraseRequest& request) = 0;
};

/// Client for POST {endpoint}/v1/paraphrase.
class RemoteParaphraser final : public Paraphraser {
public:
    RemoteParaphraser(std::string endpoint, http::RetryPolicy policy);
    std::vector<std::string> paraphrase(const ParaphraseRequest& request) override;

private:
    std::string endpoint_;
    http::RetryPolicy policy_;
};

class ScriptedParaphraser final : public Paraphraser {
public:
    using Script = std::function<std::vector<std::string>(const ParaphraseRequest&)>;
    explicit ScriptedParaphraser(Script script) : script_(std::move(script)) {}
    std::vector<std::string> paraphrase(const ParaphraseRequest& request) override { return script_(request); }

private:
    Script script_;
};

struct AttackResult {
    SentenceSequence sequence;
    /// Indices of sentences kept verbatim because the paraphraser returned nothing usable.
    std::vector<std::size_t> fallbacks;
    /// Chosen candidate per rewritten sentence (bigram only).
    std::vector<std::size_t> selected;
};

/// Rewrites every non-prompt sentence, feeding the already rewritten text as context.
AttackResult paraphrase_document(const AttackSpec& spec, Paraphraser& paraphraser, const SentenceSequence& seq);

/// Index of the smallest value; the lowest index wins ties.
std::size_t select_min_soft_count(std::span<const double> soft_counts);

/// Requests `n_candidates` paraphrases per sentence and keeps the one that
/// hurts the detector most (see AdversaryMode).
AttackResult bigram_attack(const AttackSpec& spec, Paraphraser& paraphraser, const SentenceSequence& seq,
                           const DetectorConfig& detector, Embedder& embedder);

/// Removes each non-prompt sentence with probability spec.p. If everything is
/// dropped the draw is repeated once, then AllDropped is thrown.
SentenceSequence drop_attack(const AttackSpec& spec, const SentenceSequence& seq);

/// Replaces each sentence-final mark that is followed by another sentence with
/// " and" with probability spec.p (< 0.5), lower-casing the next sentence's first letter.
std::string merge_attack(const AttackSpec& spec, std::string_view text);

/// Runs one attack (or each step of a composed one, in order) on a text.
/// Paraphrase and bigram steps need `paraphraser`; the detector-aware bigram
/// step also needs `detector` and `embedder`. Missing pieces throw InvalidConfig.
std::string apply_attack(const AttackSpec& spec, std::string_view text, Paraphraser* paraphraser,
                         const DetectorConfig* detector = nullptr, Embedder* embedder = nullptr);

} // namespace simmark
