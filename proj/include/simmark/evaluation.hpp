#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace simmark {

enum class Label { Human, Watermarked };

std::string_view to_string(Label label) noexcept;
Label parse_label(std::string_view name);

struct ScoredRecord {
    std::string id;
    Label label = Label::Human;
    double z_soft = 0.0;
    std::size_t N = 0;
};

struct ScoredCorpus {
    std::vector<ScoredRecord> records;

    std::vector<double> scores(Label label) const;
};

ScoredCorpus scored_corpus_from_jsonl(const std::vector<nlohmann::json>& records);

/// Probability that a watermarked score beats a human score, ties counting one half.
/// Computed from average ranks. Throws MissingClass when either side is empty.
double roc_auc(std::span<const double> human, std::span<const double> watermarked);
double roc_auc(const ScoredCorpus& corpus);

/// Fraction of watermarked scores strictly above the beta swept on the human scores.
double tp_at_fp(std::span<const double> human, std::span<const double> watermarked, double fp_target);
double tp_at_fp(const ScoredCorpus& corpus, double fp_target);

/// Shannon entropy in bits of the whitespace-token trigram distribution.
/// Throws TooShort below three tokens.
double ent3(std::string_view text);

struct EvalSummary {
    double roc_auc = 0.0;
    std::map<double, double> tp_at_fp;
    std::optional<double> mean_attempts;
    std::optional<double> latency_per_sentence_ms;
    std::optional<double> ent3_bits;

    bool operator==(const EvalSummary&) const = default;
};

nlohmann::json to_json(const EvalSummary& summary);

/// ROC-AUC and TP at 1% and 5% FP for a scored corpus.
EvalSummary summarize(const ScoredCorpus& corpus, std::span<const double> fp_targets = {});

} // namespace simmark
