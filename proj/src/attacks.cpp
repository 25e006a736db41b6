#include "simmark/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

#include <json.hpp>

#include "simmark/rng.hpp"

namespace simmark {
namespace {

void check_probability(double p, double upper, const char* what) {
    if (!(p >= 0.0 && p < upper))
        throw Error(Errc::InvalidProbability, std::string(what) + " probability must lie in [0, " +
                                                  (upper == 1.0 ? "1" : "0.5") + ")");
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string context_of(const std::vector<std::string>& sentences) {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

std::vector<std::string> words(std::string_view s) {
    std::istringstream in{std::string(s)};
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::size_t word_edit_distance(std::string_view x, std::string_view y) {
    const auto a = words(x);
    const auto b = words(y);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

bool is_mark(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}' || static_cast<unsigned char>(c) >= 0x80;
}

std::vector<std::string> usable(std::vector<std::string> candidates) {
    std::vector<std::string> out;
    for (auto& c : candidates) {
        std::string t = trim(c);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

} // namespace

std::string_view to_string(AttackKind kind) noexcept {
    switch (kind) {
    case AttackKind::Paraphrase: return "paraphrase";
    case AttackKind::Bigram: return "bigram";
    case AttackKind::Drop: return "drop";
    case AttackKind::Merge: return "merge";
    case AttackKind::Composed: return "composed";
    }
    return "composed";
}

AttackSpec parse_attack_kind(std::string_view name) {
    auto single = [](std::string_view n) {
        if (n == "paraphrase") return AttackKind::Paraphrase;
        if (n == "bigram") return AttackKind::Bigram;
        if (n == "drop") return AttackKind::Drop;
        if (n == "merge") return AttackKind::Merge;
        throw Error(Errc::InvalidConfig, "unknown attack kind '" + std::string(n) + "'");
    };
    AttackSpec spec;
    std::size_t start = 0;
    while (true) {
        const auto plus = name.find('+', start);
        spec.steps.push_back(single(name.substr(start, plus == std::string_view::npos ? plus : plus - start)));
        if (plus == std::string_view::npos) break;
        start = plus + 1;
    }
    spec.kind = spec.steps.size() == 1 ? spec.steps.front() : AttackKind::Composed;
    return spec;
}

std::string render_template(std::string_view tmpl, std::string_view context, std::string_view sentence, int n) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl.substr(i, 9) == "{context}") {
            out += context;
            i += 9;
        } else if (tmpl.substr(i, 6) == "{sent}") {
            out += sentence;
            i += 6;
        } else if (tmpl.substr(i, 11) == "{num_beams}") {
            out += std::to_string(n);
            i += 11;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

RemoteParaphraser::RemoteParaphraser(std::string endpoint, http::RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(std::move(policy)) {
    if (endpoint_.empty()) throw Error(Errc::InvalidConfig, "remote paraphraser needs an endpoint");
}

std::vector<std::string> RemoteParaphraser::paraphrase(const ParaphraseRequest& request) {
    const nlohmann::json body = {
        {"sentence", request.sentence}, {"context", request.context}, {"n", request.n}, {"prompt", request.prompt}};
    const auto reply = http::post_json(endpoint_, "/v1/paraphrase", body, policy_, Errc::ParaphraserUnavailable);
    if (!reply.contains("candidates") || !reply["candidates"].is_array())
        throw Error(Errc::ParaphraserUnavailable, "paraphrase reply lacks a candidates array");
    std::vector<std::string> out;
    for (const auto& c : reply["candidates"])
        if (c.is_string()) out.push_back(c.get<std::string>());
    return out;
}

AttackResult paraphrase_document(const AttackSpec& spec, Paraphraser& paraphraser, const SentenceSequence& seq) {
    AttackResult result;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::string& original = seq[i].text;
        if (i < seq.prompt_len) {
            out.push_back(original);
            continue;
        }
        const std::string context = context_of(out);
        ParaphraseRequest request{original, context, 1, render_template(spec.prompt_template, context, original, 1)};
        auto candidates = usable(paraphraser.paraphrase(request));
        if (candidates.empty()) {
            result.fallbacks.push_back(i);
            out.push_back(original);
        } else {
            out.push_back(std::move(candidates.front()));
        }
    }
    result.sequence = make_sequence(out, seq.prompt_len);
    return result;
}

std::string_view to_string(BigramObjective objective) noexcept {
    switch (objective) {
    case BigramObjective::SoftCount: return "soft-count";
    case BigramObjective::HardCount: return "hard-count";
    case BigramObjective::RunningZ: return "running-z";
    }
    return "soft-count";
}

BigramObjective parse_bigram_objective(std::string_view name) {
    if (name == "soft-count") return BigramObjective::SoftCount;
    if (name == "hard-count") return BigramObjective::HardCount;
    if (name == "running-z") return BigramObjective::RunningZ;
    throw Error(Errc::InvalidConfig, "unknown bigram objective '" + std::string(name) + "'");
}

std::size_t select_min_soft_count(std::span<const double> soft_counts) {
    if (soft_counts.empty()) throw Error(Errc::InvalidRequest, "no candidates to select from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < soft_counts.size(); ++i)
        if (soft_counts[i] < soft_counts[best]) best = i;
    return best;
}

AttackResult bigram_attack(const AttackSpec& spec, Paraphraser& paraphraser, const SentenceSequence& seq,
                           const DetectorConfig& detector, Embedder& embedder) {
    if (spec.n_candidates < 2) throw Error(Errc::InvalidConfig, "bigram attack needs n_candidates >= 2");
    detector.validate_scoring();
    const bool aware = spec.mode == AdversaryMode::DetectorAware;
    if (aware && spec.objective == BigramObjective::RunningZ && !(detector.p0 > 0.0 && detector.p0 < 1.0))
        throw Error(Errc::InvalidConfig, "the running-z objective needs a calibrated p0");
    auto embed_projected = [&](const std::vector<std::string>& texts) {
        auto vs = embedder.embed(texts);
        if (detector.use_pca)
            for (auto& v : vs) v = pca_transform(*detector.pca, v);
        return vs;
    };

    AttackResult result;
    std::vector<std::string> out;
    // Soft counts of the pairs already rewritten, for the running-z objective.
    double prefix_sum = 0.0;
    std::size_t prefix_pairs = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::string& original = seq[i].text;
        if (i < seq.prompt_len) {
            out.push_back(original);
            continue;
        }
        const std::string context = context_of(out);
        ParaphraseRequest request{original, context, spec.n_candidates,
                                  render_template(spec.bigram_template, context, original, spec.n_candidates)};
        auto candidates = usable(paraphraser.paraphrase(request));
        if (candidates.empty()) {
            result.fallbacks.push_back(i);
            out.push_back(original);
            continue;
        }
        std::size_t pick = 0;
        if (aware && !out.empty()) {
            std::vector<std::string> texts{out.back()};
            texts.insert(texts.end(), candidates.begin(), candidates.end());
            const auto vs = embed_projected(texts);
            std::vector<double> soft, score;
            for (std::size_t c = 1; c < vs.size(); ++c) {
                const double s = similarity(detector.measure, vs.front(), vs[c]);
                soft.push_back(soft_count(s, detector.interval, detector.decay));
                switch (spec.objective) {
                case BigramObjective::SoftCount: score.push_back(soft.back()); break;
                case BigramObjective::HardCount: score.push_back(soft_count(s, detector.interval, DecayFactor::hard())); break;
                case BigramObjective::RunningZ:
                    score.push_back(z_soft(prefix_sum + soft.back(), detector.p0, prefix_pairs + 1));
                    break;
                }
            }
            pick = select_min_soft_count(score);
            prefix_sum += soft[pick];
            ++prefix_pairs;
        } else if (spec.mode == AdversaryMode::EditDistance) {
            std::vector<double> negated;
            for (const auto& c : candidates) negated.push_back(-static_cast<double>(word_edit_distance(original, c)));
            pick = select_min_soft_count(negated);
        }
        result.selected.push_back(pick);
        out.push_back(std::move(candidates[pick]));
    }
    result.sequence = make_sequence(out, seq.prompt_len);
    return result;
}

SentenceSequence drop_attack(const AttackSpec& spec, const SentenceSequence& seq) {
    check_probability(spec.p, 1.0, "drop");
    std::mt19937_64 engine(spec.rng_seed);
    const std::size_t prompt = std::min(seq.prompt_len, seq.size());
    if (seq.size() == prompt) return seq;

    std::vector<std::string> kept;
    for (int round = 0; round < 2; ++round) {
        kept.clear();
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (i < prompt || !rng::bernoulli(engine, spec.p)) kept.push_back(seq[i].text);
        }
        if (kept.size() > prompt) return make_sequence(kept, seq.prompt_len);
    }
    throw Error(Errc::AllDropped, "every non-prompt sentence was dropped twice");
}

std::string merge_attack(const AttackSpec& spec, std::string_view text) {
    check_probability(spec.p, 0.5, "merge");
    if (spec.p == 0.0) return std::string(text);
    const SentenceSequence seq = split_sentences(text);
    std::mt19937_64 engine(spec.rng_seed);

    struct Edit {
        std::size_t mark_begin, mark_end, next_begin;
    };
    std::vector<Edit> edits;
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
        const auto& s = seq[k];
        // Skip closing quotes/brackets to find the terminal run.
        std::size_t end = s.end;
        while (end > s.begin && !is_mark(text[end - 1]) && is_closer(text[end - 1])) --end;
        std::size_t begin = end;
        while (begin > s.begin && is_mark(text[begin - 1])) --begin;
        if (begin == end) continue;
        if (rng::bernoulli(engine, spec.p)) edits.push_back({begin, end, seq[k + 1].begin});
    }

    std::string out(text);
    for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
        std::size_t at = it->next_begin;
        while (at < out.size() && (out[at] == '"' || out[at] == '\'' || out[at] == '(' || out[at] == '[')) ++at;
        if (at == out.size()) at = it->next_begin;
        const bool pronoun_i = out[at] == 'I' && (at + 1 == out.size() || !std::isalpha(static_cast<unsigned char>(out[at + 1])));
        if (std::isupper(static_cast<unsigned char>(out[at])) && !pronoun_i)
            out[at] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[at])));
        out.replace(it->mark_begin, it->mark_end - it->mark_begin, " and");
    }
    return out;
}

std::string apply_attack(const AttackSpec& spec, std::string_view text, Paraphraser* paraphraser,
                         const DetectorConfig* detector, Embedder* embedder) {
    std::vector<AttackKind> steps = spec.steps;
    if (steps.empty()) steps.push_back(spec.kind);
    std::string current(text);
    for (const AttackKind step : steps) {
        switch (step) {
        case AttackKind::Paraphrase:
            if (!paraphraser) throw Error(Errc::InvalidConfig, "paraphrase attack needs a paraphraser");
            current = paraphrase_document(spec, *paraphraser, split_sentences(current)).sequence.join();
            break;
        case AttackKind::Bigram:
            if (!paraphraser) throw Error(Errc::InvalidConfig, "bigram attack needs a paraphraser");
            if (spec.mode == AdversaryMode::DetectorAware && !(detector && embedder))
                throw Error(Errc::InvalidConfig, "detector-aware bigram attack needs the detector config");
            if (detector && embedder) {
                current = bigram_attack(spec, *paraphraser, split_sentences(current), *detector, *embedder).sequence.join();
            } else {
                DetectorConfig unused;
                unused.interval = Interval(0.0, 1.0);
                SyntheticEmbedder none(EmbedderSpec{});
                current = bigram_attack(spec, *paraphraser, split_sentences(current), unused, none).sequence.join();
            }
            break;
        case AttackKind::Drop:
            current = drop_attack(spec, split_sentences(current)).join();
            break;
        case AttackKind::Merge:
            current = merge_attack(spec, current);
            break;
        case AttackKind::Composed:
            throw Error(Errc::InvalidConfig, "composed attacks cannot be nested");
        }
    }
    return current;
}

} // namespace simmark
