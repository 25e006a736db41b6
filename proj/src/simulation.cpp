#include "simmark/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "simmark/rng.hpp"

namespace simmark {
namespace {

constexpr std::string_view kConsonants = "bcdfghjklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

enum Stream : std::uint64_t {
    kEmbedderStream = 0,
    kCalibrationStream = 1,
    kHumanStream = 2,
    kWatermarkStream = 3,
    kPerturbStream = 4,
    kDropStream = 5,
    kMergeStream = 6,
};

std::string pseudo_word(rng::SplitMix64& engine) {
    const auto syllables = 2 + rng::below(engine, 3);
    std::string w;
    for (std::uint64_t s = 0; s < syllables; ++s) {
        w += kConsonants[rng::below(engine, kConsonants.size())];
        w += kVowels[rng::below(engine, kVowels.size())];
    }
    return w;
}

double truncated_sd(const SimulationConfig& c) { return 1.0 / std::sqrt(static_cast<double>(c.embed_dim)); }

double decay_from_json(const nlohmann::json& v) {
    if (v.is_null() || (v.is_string() && (v == "inf" || v == "infinity")))
        return std::numeric_limits<double>::infinity();
    return v.get<double>();
}

} // namespace

void SimulationConfig::validate() const {
    if (embed_dim < 2) throw Error(Errc::InvalidConfig, "embed_dim must be at least 2");
    if (!(p0 > 0.0 && p0 < 1.0)) throw Error(Errc::InvalidConfig, "p0 must lie in (0, 1)");
    if (!interval && !(interval_lower_quantile >= 0.0 && interval_lower_quantile + p0 < 1.0))
        throw Error(Errc::InvalidConfig, "interval_lower_quantile + p0 must stay below 1");
    if (n_calibration == 0 || n_human == 0 || n_watermarked == 0)
        throw Error(Errc::InvalidConfig, "corpus sizes must be positive");
    if (sentences_per_doc < 1) throw Error(Errc::InvalidConfig, "sentences_per_doc must be positive");
    if (words_min < 1 || words_min > words_max) throw Error(Errc::InvalidConfig, "need 1 <= words_min <= words_max");
    if (n_max < 1) throw Error(Errc::InvalidConfig, "n_max must be at least 1");
    if (!(perturb_sigma >= 0.0)) throw Error(Errc::InvalidConfig, "perturb_sigma must be non-negative");
    if (!(drop_p >= 0.0 && drop_p < 1.0)) throw Error(Errc::InvalidProbability, "drop_p must lie in [0, 1)");
    if (!(merge_p >= 0.0 && merge_p < 0.5)) throw Error(Errc::InvalidProbability, "merge_p must lie in [0, 0.5)");
    if (fp_targets.empty()) throw Error(Errc::InvalidConfig, "fp_targets must not be empty");
}

SimulationConfig simulation_config_from_json(const nlohmann::json& j) {
    SimulationConfig c;
    try {
        c.embed_dim = j.value("embed_dim", c.embed_dim);
        c.p0 = j.value("p0", c.p0);
        c.interval_lower_quantile = j.value("interval_lower_quantile", c.interval_lower_quantile);
        if (j.contains("interval") && !j["interval"].is_null())
            c.interval = Interval(j["interval"].at(0).get<double>(), j["interval"].at(1).get<double>());
        c.n_calibration = j.value("n_calibration", c.n_calibration);
        c.n_human = j.value("n_human", c.n_human);
        c.n_watermarked = j.value("n_watermarked", c.n_watermarked);
        c.sentences_per_doc = j.value("sentences_per_doc", c.sentences_per_doc);
        c.words_min = j.value("words_min", c.words_min);
        c.words_max = j.value("words_max", c.words_max);
        if (j.contains("K")) c.decay = DecayFactor(decay_from_json(j["K"]));
        c.n_max = j.value("n_max", c.n_max);
        c.min_sentences = j.value("min_sentences", c.min_sentences);
        c.fp_targets = j.value("fp_targets", c.fp_targets);
        c.perturb_sigma = j.value("perturb_sigma", c.perturb_sigma);
        c.drop_p = j.value("drop_p", c.drop_p);
        c.merge_p = j.value("merge_p", c.merge_p);
        c.candidate_cost_ms = j.value("candidate_cost_ms", c.candidate_cost_ms);
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidConfig, std::string("simulation config: ") + e.what());
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const SimulationConfig& c) {
    nlohmann::json j = {{"embed_dim", c.embed_dim},
                        {"p0", c.p0},
                        {"interval_lower_quantile", c.interval_lower_quantile},
                        {"n_calibration", c.n_calibration},
                        {"n_human", c.n_human},
                        {"n_watermarked", c.n_watermarked},
                        {"sentences_per_doc", c.sentences_per_doc},
                        {"words_min", c.words_min},
                        {"words_max", c.words_max},
                        {"K", std::isinf(c.decay.K) ? nlohmann::json("inf") : nlohmann::json(c.decay.K)},
                        {"n_max", c.n_max},
                        {"min_sentences", c.min_sentences},
                        {"fp_targets", c.fp_targets},
                        {"perturb_sigma", c.perturb_sigma},
                        {"drop_p", c.drop_p},
                        {"merge_p", c.merge_p},
                        {"candidate_cost_ms", c.candidate_cost_ms}};
    if (c.interval) j["interval"] = {c.interval->a, c.interval->b};
    return j;
}

Interval simulation_interval(const SimulationConfig& c) {
    c.validate();
    if (c.interval) return *c.interval;
    const boost::math::normal_distribution<double> law(0.0, truncated_sd(c));
    const double lo_mass = boost::math::cdf(law, -1.0);
    const double span = boost::math::cdf(law, 1.0) - lo_mass;
    auto quantile = [&](double q) { return boost::math::quantile(law, lo_mass + q * span); };
    return Interval(quantile(c.interval_lower_quantile), quantile(c.interval_lower_quantile + c.p0));
}

double model_interval_mass(const SimulationConfig& c, const Interval& interval) {
    const boost::math::normal_distribution<double> law(0.0, truncated_sd(c));
    const double lo_mass = boost::math::cdf(law, -1.0);
    const double span = boost::math::cdf(law, 1.0) - lo_mass;
    const double a = std::clamp(interval.a, -1.0, 1.0);
    const double b = std::clamp(interval.b, -1.0, 1.0);
    return (boost::math::cdf(law, b) - boost::math::cdf(law, a)) / span;
}

std::string random_sentence(std::uint64_t& state, int words_min, int words_max) {
    rng::SplitMix64 engine(state);
    const auto n = words_min + static_cast<int>(rng::below(engine, static_cast<std::uint64_t>(words_max - words_min + 1)));
    std::string out;
    for (int i = 0; i < n; ++i) {
        std::string w = pseudo_word(engine);
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (i) out += ' ';
        out += w;
    }
    out += '.';
    state = engine();
    return out;
}

RandomSentenceGenerator::RandomSentenceGenerator(std::uint64_t seed, int words_min, int words_max)
    : state_(seed), words_min_(words_min), words_max_(words_max) {}

std::vector<std::string> RandomSentenceGenerator::complete(const GenerationRequest& request) {
    std::vector<std::string> out;
    for (int i = 0; i < request.n; ++i) {
        std::string text = " " + random_sentence(state_, words_min_, words_max_);
        // Trailing fragment, as a token-limited continuation would have.
        rng::SplitMix64 engine(state_);
        text += ' ';
        text += pseudo_word(engine);
        text += ' ';
        text += pseudo_word(engine);
        state_ = engine();
        out.push_back(std::move(text));
    }
    return out;
}

WordSwapParaphraser::WordSwapParaphraser(std::uint64_t seed, double swap_rate) : seed_(seed), swap_rate_(swap_rate) {}

std::vector<std::string> WordSwapParaphraser::paraphrase(const ParaphraseRequest& request) {
    std::vector<std::string> words;
    {
        std::istringstream in(request.sentence);
        std::string w;
        while (in >> w) words.push_back(w);
    }
    std::vector<std::string> out;
    for (int c = 0; c < request.n; ++c) {
        rng::SplitMix64 engine(rng::derive_seed(rng::fnv1a64(request.sentence, seed_), static_cast<std::uint64_t>(c)));
        std::string text;
        for (std::size_t i = 0; i < words.size(); ++i) {
            std::string w = words[i];
            if (rng::bernoulli(engine, swap_rate_)) {
                std::string trail;
                while (!w.empty() && std::ispunct(static_cast<unsigned char>(w.back()))) {
                    trail.insert(trail.begin(), w.back());
                    w.pop_back();
                }
                const bool cap = !w.empty() && std::isupper(static_cast<unsigned char>(w[0]));
                w = pseudo_word(engine);
                if (cap) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
                w += trail;
            }
            if (i) text += ' ';
            text += w;
        }
        out.push_back(std::move(text));
    }
    return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    workers.clear();
    if (error) std::rethrow_exception(error);
}

std::vector<std::string> synthesize_human_texts(const SimulationConfig& config, std::uint64_t seed,
                                                std::size_t count) {
    std::vector<std::string> texts(count);
    for (std::size_t d = 0; d < count; ++d) {
        std::uint64_t state = rng::derive_seed(seed, d);
        std::string text;
        for (std::size_t s = 0; s <= config.sentences_per_doc; ++s) {
            if (s) text += ' ';
            text += random_sentence(state, config.words_min, config.words_max);
        }
        texts[d] = std::move(text);
    }
    return texts;
}

std::vector<WatermarkedDocument> synthesize_watermarked(const SimulationConfig& config, std::uint64_t seed,
                                                        std::size_t count, Embedder& embedder,
                                                        const Interval& interval) {
    GeneratorConfig gen;
    gen.interval = interval;
    gen.measure = SimilarityMeasure::Cosine;
    gen.n_max = config.n_max;
    gen.model_id = "scripted";

    std::vector<WatermarkedDocument> docs(count);
    parallel_for(count, config.threads, [&](std::size_t d) {
        const std::uint64_t doc_seed = rng::derive_seed(seed, d);
        std::uint64_t prompt_state = rng::derive_seed(doc_seed, 0);
        const std::string prompt = random_sentence(prompt_state, config.words_min, config.words_max);

        RandomSentenceGenerator inner(rng::derive_seed(doc_seed, 1), config.words_min, config.words_max);
        double virtual_ms = 0.0;
        ScriptedGenerator timed([&](const GenerationRequest& r, std::size_t) {
            virtual_ms += config.candidate_cost_ms;
            GenerationRequest one = r;
            one.n = 1;
            return inner.complete(one).front();
        });
        const Clock clock = [&virtual_ms] { return static_cast<std::int64_t>(std::llround(virtual_ms)); };
        auto trace = generate_document(gen, timed, embedder, prompt, static_cast<int>(config.sentences_per_doc), clock);
        docs[d].text = trace.text();
        docs[d].trace = std::move(trace);
    });
    return docs;
}

std::vector<std::vector<double>> corpus_similarities(const DetectorConfig& config, Embedder& embedder,
                                                     const std::vector<std::string>& texts, unsigned threads) {
    std::vector<std::vector<double>> out(texts.size());
    parallel_for(texts.size(), threads, [&](std::size_t i) {
        out[i] = pair_similarities(config, embedder, split_sentences(texts[i]));
    });
    return out;
}

EmbedderSpec simulation_embedder_spec(const SimulationConfig& config, std::uint64_t seed) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::Synthetic;
    spec.model_id = "synthetic";
    spec.dim = config.embed_dim;
    spec.seed = rng::derive_seed(seed, kEmbedderStream);
    return spec;
}

nlohmann::json to_json(const SimulationResult& r) {
    nlohmann::json betas = nlohmann::json::object();
    for (const auto& [fp, beta] : r.calibration.beta_table) betas[fmt::format("{}", fp)] = beta;
    return {{"summary", to_json(r.summary)},
            {"interval", {r.interval.a, r.interval.b}},
            {"model_p0", r.model_p0},
            {"calibrated_p0", r.calibration.p0},
            {"beta_table", betas},
            {"generator_calls", r.generator_calls},
            {"documents", {{"human", r.scores.scores(Label::Human).size()},
                           {"watermarked", r.scores.scores(Label::Watermarked).size()}}}};
}

SimulationResult run_simulation_study(const SimulationConfig& config, std::uint64_t seed) {
    config.validate();
    SimulationResult result;
    result.interval = simulation_interval(config);
    result.model_p0 = model_interval_mass(config, result.interval);

    SyntheticEmbedder embedder(simulation_embedder_spec(config, seed));
    DetectorConfig detector;
    detector.interval = result.interval;
    detector.measure = SimilarityMeasure::Cosine;
    detector.decay = config.decay;
    detector.min_sentences = config.min_sentences;

    const auto calibration_texts =
        synthesize_human_texts(config, rng::derive_seed(seed, kCalibrationStream), config.n_calibration);
    const auto calibration_sims = corpus_similarities(detector, embedder, calibration_texts, config.threads);
    result.calibration = calibrate_from_similarities(detector, calibration_sims, config.fp_targets);
    result.calibration.corpus_id = "simulation";
    result.calibration.model_id = embedder.spec().model_id;
    result.calibration.instruction = embedder.spec().instruction;
    detector.p0 = result.calibration.p0;
    detector.beta = result.calibration.beta_table.begin()->second;

    const auto human_texts = synthesize_human_texts(config, rng::derive_seed(seed, kHumanStream), config.n_human);
    const auto human_sims = corpus_similarities(detector, embedder, human_texts, config.threads);
    for (std::size_t i = 0; i < human_sims.size(); ++i) {
        const auto report = score_similarities(detector, human_sims[i]);
        result.scores.records.push_back({fmt::format("h{}", i), Label::Human, report.z_soft, report.N});
    }

    const auto docs = synthesize_watermarked(config, rng::derive_seed(seed, kWatermarkStream), config.n_watermarked,
                                             embedder, result.interval);
    std::vector<std::string> attacked(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        std::string text = docs[i].text;
        if (config.drop_p > 0.0) {
            AttackSpec drop;
            drop.kind = AttackKind::Drop;
            drop.p = config.drop_p;
            drop.rng_seed = rng::derive_seed(rng::derive_seed(seed, kDropStream), i);
            text = drop_attack(drop, split_sentences(text)).join();
        }
        if (config.merge_p > 0.0) {
            AttackSpec merge;
            merge.kind = AttackKind::Merge;
            merge.p = config.merge_p;
            merge.rng_seed = rng::derive_seed(rng::derive_seed(seed, kMergeStream), i);
            text = merge_attack(merge, text);
        }
        attacked[i] = std::move(text);
    }
    auto wm_sims = corpus_similarities(detector, embedder, attacked, config.threads);

    double attempts = 0.0, latency = 0.0, entropy = 0.0;
    std::size_t sentences = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (config.perturb_sigma > 0.0) {
            rng::SplitMix64 noise(rng::derive_seed(rng::derive_seed(seed, kPerturbStream), i));
            for (double& s : wm_sims[i]) s += config.perturb_sigma * rng::standard_normal(noise);
        }
        const auto report = score_similarities(detector, wm_sims[i]);
        result.scores.records.push_back({fmt::format("w{}", i), Label::Watermarked, report.z_soft, report.N});
        for (const auto& e : docs[i].trace.entries) {
            attempts += e.attempts;
            latency += static_cast<double>(e.wall_ms);
            ++sentences;
        }
        entropy += ent3(docs[i].text);
        result.generator_calls += docs[i].trace.generator_calls;
    }

    result.summary = summarize(result.scores, config.fp_targets);
    result.summary.mean_attempts = attempts / static_cast<double>(sentences);
    result.summary.latency_per_sentence_ms = latency / static_cast<double>(sentences);
    result.summary.ent3_bits = entropy / static_cast<double>(docs.size());
    return result;
}

} // namespace simmark
