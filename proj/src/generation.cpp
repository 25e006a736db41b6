#include "simmark/generation.hpp"

#include <chrono>
#include <sstream>

#include "simmark/rng.hpp"

namespace simmark {

void LlmSamplingParams::validate() const {
    if (!(temperature > 0.0)) throw Error(Errc::InvalidConfig, "temperature must be positive");
    if (min_new_tokens < 0 || min_new_tokens > max_new_tokens)
        throw Error(Errc::InvalidConfig, "need 0 <= min_new_tokens <= max_new_tokens");
}

void GeneratorConfig::validate() const {
    if (use_pca && !pca) throw Error(Errc::InvalidConfig, "use_pca is set but no PCA model is loaded");
    if (n_max < 1) throw Error(Errc::InvalidConfig, "n_max must be at least 1");
    if (candidates_per_round < 1) throw Error(Errc::InvalidConfig, "candidates_per_round must be at least 1");
    sampling.validate();
}

namespace {

std::string last_tokens(const std::string& text, std::size_t keep) {
    std::istringstream in(text);
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    if (tokens.size() <= keep) return text;
    std::string out;
    for (std::size_t i = tokens.size() - keep; i < tokens.size(); ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

nlohmann::json request_body(const GenerationRequest& r, const std::string& prompt) {
    return {{"model", r.model_id},
            {"prompt", prompt},
            {"temperature", r.sampling.temperature},
            {"repetition_penalty", r.sampling.repetition_penalty},
            {"min_new_tokens", r.sampling.min_new_tokens},
            {"max_new_tokens", r.sampling.max_new_tokens},
            {"n", r.n}};
}

std::vector<std::string> parse_completions(const nlohmann::json& reply) {
    if (!reply.contains("completions") || !reply["completions"].is_array())
        throw Error(Errc::GeneratorUnavailable, "generate reply lacks a completions array");
    std::vector<std::string> out;
    for (const auto& c : reply["completions"]) {
        if (!c.is_string()) throw Error(Errc::GeneratorUnavailable, "completion is not a string");
        out.push_back(c.get<std::string>());
    }
    return out;
}

Embedding project(const GeneratorConfig& config, const Embedding& v) {
    return config.use_pca ? Embedding(pca_transform(*config.pca, v)) : v;
}

std::vector<Embedding> embed_mapped(Embedder& embedder, const std::vector<std::string>& texts) {
    try {
        return embedder.embed(texts);
    } catch (const Error& e) {
        if (e.code() == Errc::RemoteUnavailable) throw Error(Errc::EmbedderUnavailable, e.what());
        throw;
    }
}

} // namespace

RemoteGenerator::RemoteGenerator(std::string endpoint, http::RetryPolicy policy, std::size_t max_context_tokens)
    : endpoint_(std::move(endpoint)), policy_(std::move(policy)), max_context_tokens_(max_context_tokens) {
    if (endpoint_.empty()) throw Error(Errc::InvalidConfig, "remote generator needs an endpoint");
}

std::vector<std::string> RemoteGenerator::complete(const GenerationRequest& request) {
    try {
        return parse_completions(http::post_json(endpoint_, "/v1/generate", request_body(request, request.prompt),
                                                 policy_, Errc::GeneratorUnavailable));
    } catch (const http::StatusError& e) {
        if (e.status() != 413) throw;
    }
    const std::string truncated = last_tokens(request.prompt, max_context_tokens_);
    return parse_completions(http::post_json(endpoint_, "/v1/generate", request_body(request, truncated), policy_,
                                             Errc::GeneratorUnavailable));
}

std::vector<std::string> ScriptedGenerator::complete(const GenerationRequest& request) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(request.n));
    for (int i = 0; i < request.n; ++i) out.push_back(script_(request, calls_++));
    return out;
}

std::string GenerationTrace::text() const {
    std::string out;
    auto add = [&out](const std::string& s) {
        if (!out.empty()) out += ' ';
        out += s;
    };
    for (const auto& s : prompt_sentences) add(s);
    for (const auto& e : entries) add(e.text);
    return out;
}

nlohmann::json to_json(const GenerationTrace& trace) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : trace.entries) {
        entries.push_back({{"text", e.text},
                           {"attempts", e.attempts},
                           {"final_similarity", e.final_similarity},
                           {"accepted_in_interval", e.accepted_in_interval},
                           {"wall_ms", e.wall_ms}});
    }
    return {{"prompt_sentences", trace.prompt_sentences},
            {"sentences", entries},
            {"generator_calls", trace.generator_calls},
            {"text", trace.text()}};
}

Clock steady_clock_ms() {
    return [] {
        using namespace std::chrono;
        return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
    };
}

std::optional<std::string> extract_first_sentence(std::string_view continuation) {
    try {
        auto seq = split_sentences(continuation);
        return std::move(seq.sentences.front().text);
    } catch (const Error& e) {
        if (e.code() == Errc::EmptyText) return std::nullopt;
        throw;
    }
}

std::pair<Sentence, TraceEntry> generate_next_sentence(const GeneratorConfig& config, TextGenerator& generator,
                                                       Embedder& embedder, const SentenceSequence& context,
                                                       const Clock& clock) {
    config.validate();
    if (context.empty()) throw Error(Errc::InvalidRequest, "generation needs a non-empty context");
    const std::int64_t started = clock();

    const std::string& anchor_text = context.sentences.back().text;
    const Embedding anchor = project(config, embed_mapped(embedder, {anchor_text}).front());

    GenerationRequest request{config.model_id, context.join(), config.sampling, 1};
    auto draw = [&](int count) {
        request.n = count;
        std::vector<std::optional<std::string>> round;
        for (auto& c : generator.complete(request)) round.push_back(extract_first_sentence(c));
        return round;
    };
    auto score = [&](const std::optional<std::string>& candidate) -> std::optional<double> {
        if (!candidate) return std::nullopt;
        const Embedding v = project(config, embed_mapped(embedder, {*candidate}).front());
        return similarity(config.measure, anchor, v);
    };
    auto sampled = rejection_sample(config.interval, config.n_max, config.candidates_per_round, draw, score);

    TraceEntry entry{*sampled.candidate, sampled.attempts, sampled.similarity, sampled.in_interval,
                     clock() - started};
    const auto& prev = context.sentences.back();
    Sentence sentence{context.size(), entry.text, prev.end + 1, prev.end + 1 + entry.text.size()};
    return {std::move(sentence), std::move(entry)};
}

GenerationTrace generate_document(const GeneratorConfig& config, TextGenerator& generator, Embedder& embedder,
                                  std::string_view prompt, int n_sentences, const Clock& clock) {
    if (n_sentences < 1) throw Error(Errc::InvalidRequest, "n_sentences must be at least 1");
    config.validate();
    SentenceSequence context = split_sentences(prompt);
    context.prompt_len = context.size();

    GenerationTrace trace;
    trace.prompt_sentences = context.texts();

    // Count generator completions through a forwarding wrapper.
    struct Counting final : TextGenerator {
        TextGenerator& inner;
        std::size_t calls = 0;
        explicit Counting(TextGenerator& g) : inner(g) {}
        std::vector<std::string> complete(const GenerationRequest& r) override {
            auto out = inner.complete(r);
            calls += out.size();
            return out;
        }
    } counting(generator);

    for (int i = 0; i < n_sentences; ++i) {
        auto [sentence, entry] = generate_next_sentence(config, counting, embedder, context, clock);
        context.sentences.push_back(std::move(sentence));
        trace.entries.push_back(std::move(entry));
    }
    trace.generator_calls = counting.calls;
    return trace;
}

std::vector<int> simulate_bernoulli_attempts(double p, int n_max, std::size_t sentences, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::InvalidProbability, "acceptance probability must be in [0, 1]");
    const Interval target(0.0, 1.0);
    rng::SplitMix64 engine(seed);
    auto draw = [&](int count) {
        // Valid candidates score 0.5 (inside), invalid ones 2.0 (outside).
        std::vector<double> round;
        for (int i = 0; i < count; ++i) round.push_back(rng::bernoulli(engine, p) ? 0.5 : 2.0);
        return round;
    };
    auto score = [](double s) -> std::optional<double> { return s; };
    std::vector<int> attempts;
    attempts.reserve(sentences);
    for (std::size_t i = 0; i < sentences; ++i)
        attempts.push_back(rejection_sample(target, n_max, 1, draw, score).attempts);
    return attempts;
}

} // namespace simmark
