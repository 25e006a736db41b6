#include "simmark/config.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include <spdlog/spdlog.h>

#include "simmark/io.hpp"
#include "simmark/presets.hpp"
#include "simmark/simulation.hpp"

namespace simmark {
namespace {

using nlohmann::json;

std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    if (path.is_absolute() || base.empty()) return path.string();
    return (base / path).lexically_normal().string();
}

void read_policy(const json& j, http::RetryPolicy& policy) {
    policy.timeout_ms = j.value("timeout_ms", policy.timeout_ms);
    policy.max_retries = j.value("max_retries", policy.max_retries);
    policy.backoff_ms = j.value("backoff_ms", policy.backoff_ms);
}

json policy_json(const http::RetryPolicy& p) {
    return {{"timeout_ms", p.timeout_ms}, {"max_retries", p.max_retries}, {"backoff_ms", p.backoff_ms}};
}

AdversaryMode parse_mode(const std::string& s) {
    if (s == "detector-aware") return AdversaryMode::DetectorAware;
    if (s == "edit-distance") return AdversaryMode::EditDistance;
    throw Error(Errc::InvalidConfig, "unknown adversary mode '" + s + "'");
}

std::string_view mode_name(AdversaryMode m) {
    return m == AdversaryMode::DetectorAware ? "detector-aware" : "edit-distance";
}

double read_decay(const json& v) {
    if (v.is_string()) {
        if (v == "inf" || v == "hard") return std::numeric_limits<double>::infinity();
        throw Error(Errc::InvalidConfig, "K must be a number or \"inf\"");
    }
    return v.get<double>();
}

void check_kind(const std::string& kind, const char* what) {
    if (kind != "remote" && kind != "scripted")
        throw Error(Errc::InvalidConfig, std::string(what) + " kind must be remote or scripted");
}

void mismatch(const std::string& what) { throw Error(Errc::ProvenanceMismatch, what); }

} // namespace

AppConfig app_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
    AppConfig c;
    try {
        const json sim = j.value("similarity", json::object());
        const SimilarityMeasure measure = parse_measure(sim.value("measure", std::string("cosine")));
        const bool use_pca = sim.value("pca", false);
        Interval interval = default_preset(measure, use_pca).interval;
        if (sim.contains("preset")) {
            const auto& preset = find_preset(sim["preset"].get<std::string>());
            if (preset.measure != measure || preset.use_pca != use_pca)
                throw Error(Errc::InvalidConfig, "preset '" + preset.name + "' does not match measure/pca settings");
            interval = preset.interval;
        }
        if (sim.contains("interval")) interval = Interval(sim["interval"].at(0).get<double>(), sim["interval"].at(1).get<double>());
        const DecayFactor decay = sim.contains("K") ? DecayFactor(read_decay(sim["K"])) : DecayFactor{};

        const json emb = j.value("embedder", json::object());
        const std::string kind = emb.value("kind", std::string("synthetic"));
        if (kind == "remote") c.embedder.kind = EmbedderKind::Remote;
        else if (kind == "synthetic") c.embedder.kind = EmbedderKind::Synthetic;
        else throw Error(Errc::InvalidConfig, "embedder kind must be remote or synthetic");
        c.embedder.endpoint = emb.value("endpoint", c.embedder.endpoint);
        c.embedder.model_id = emb.value("model", c.embedder.model_id);
        const std::string_view default_instruction =
            use_pca ? instructions::kPca
                    : (measure == SimilarityMeasure::Cosine ? instructions::kCosine : instructions::kEuclidean);
        c.embedder.instruction = emb.value("instruction", std::string(default_instruction));
        c.embedder.dim = emb.value("dim", c.embedder.dim);
        c.embedder.seed = emb.value("seed", c.embedder.seed);
        c.embedder.timeout_ms = emb.value("timeout_ms", c.embedder.timeout_ms);
        c.embedder.max_retries = emb.value("max_retries", c.embedder.max_retries);
        c.embedder.backoff_ms = emb.value("backoff_ms", c.embedder.backoff_ms);
        c.embedder.batch_size = emb.value("batch_size", c.embedder.batch_size);
        c.cache_file = resolve(base_dir, emb.value("cache_file", std::string()));
        if (c.embedder.dim < 2) throw Error(Errc::InvalidConfig, "embedder dim must be at least 2");
        if (c.embedder.batch_size < 1) throw Error(Errc::InvalidConfig, "embedder batch_size must be positive");

        c.pca_file = resolve(base_dir, j.value("pca", json::object()).value("model_file", std::string()));

        const json gen = j.value("generator", json::object());
        c.generator_kind = gen.value("kind", c.generator_kind);
        check_kind(c.generator_kind, "generator");
        c.generator.interval = interval;
        c.generator.measure = measure;
        c.generator.use_pca = use_pca;
        c.generator.llm_endpoint = gen.value("endpoint", std::string());
        c.generator.model_id = gen.value("model", std::string());
        c.generator.n_max = gen.value("n_max", c.generator.n_max);
        c.generator.candidates_per_round = gen.value("candidates_per_round", c.generator.candidates_per_round);
        c.generator_seed = gen.value("seed", c.generator_seed);
        if (gen.contains("sampling")) {
            const json& s = gen["sampling"];
            auto& p = c.generator.sampling;
            p.temperature = s.value("temperature", p.temperature);
            p.repetition_penalty = s.value("repetition_penalty", p.repetition_penalty);
            p.min_new_tokens = s.value("min_new_tokens", p.min_new_tokens);
            p.max_new_tokens = s.value("max_new_tokens", p.max_new_tokens);
        }
        read_policy(gen, c.generator_policy);
        {
            // The PCA model is attached by load_runtime; check the rest now.
            GeneratorConfig probe = c.generator;
            probe.use_pca = false;
            probe.validate();
        }

        const json det = j.value("detector", json::object());
        c.detector.interval = interval;
        c.detector.measure = measure;
        c.detector.use_pca = use_pca;
        c.detector.decay = decay;
        c.detector.min_sentences = det.value("min_sentences", c.detector.min_sentences);
        if (det.contains("p0")) c.detector.p0 = det["p0"].get<double>();
        if (det.contains("beta")) c.detector.beta = det["beta"].get<double>();
        c.calibration_file = resolve(base_dir, det.value("calibration_file", std::string()));
        c.fp_target = det.value("fp_target", c.fp_target);

        const json atk = j.value("attack", json::object());
        c.paraphraser_kind = atk.value("paraphraser", c.paraphraser_kind);
        check_kind(c.paraphraser_kind, "paraphraser");
        c.attack.paraphraser_endpoint = atk.value("endpoint", std::string());
        c.attack.n_candidates = atk.value("n_candidates", c.attack.n_candidates);
        c.attack.p = atk.value("p", c.attack.p);
        c.attack.rng_seed = atk.value("seed", c.attack.rng_seed);
        c.attack.mode = parse_mode(atk.value("mode", std::string("detector-aware")));
        c.attack.objective = parse_bigram_objective(atk.value("objective", std::string("soft-count")));
        c.attack.prompt_template = atk.value("prompt_template", c.attack.prompt_template);
        c.attack.bigram_template = atk.value("bigram_template", c.attack.bigram_template);
        c.swap_rate = atk.value("swap_rate", c.swap_rate);
        read_policy(atk, c.paraphraser_policy);
        if (!(c.swap_rate >= 0.0 && c.swap_rate <= 1.0)) throw Error(Errc::InvalidConfig, "swap_rate must lie in [0, 1]");

        c.log_level = j.value("log_level", c.log_level);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidConfig, std::string("config: ") + e.what());
    }
    return c;
}

void apply_env_overrides(AppConfig& c) {
    auto env = [](const char* name) -> const char* {
        const char* v = std::getenv(name);
        return v && *v ? v : nullptr;
    };
    if (const char* v = env("SIMMARK_EMBED_ENDPOINT")) c.embedder.endpoint = v;
    if (const char* v = env("SIMMARK_LLM_ENDPOINT")) c.generator.llm_endpoint = v;
    if (const char* v = env("SIMMARK_PARAPHRASE_ENDPOINT")) c.attack.paraphraser_endpoint = v;
    if (const char* v = env("SIMMARK_API_KEY")) {
        c.embedder.api_key = v;
        c.generator_policy.api_key = v;
        c.paraphraser_policy.api_key = v;
    }
}

AppConfig load_app_config(const std::string& path) {
    const json j = io::read_json(path);
    AppConfig c = app_config_from_json(j, std::filesystem::path(path).parent_path());
    apply_env_overrides(c);
    return c;
}

json to_json(const AppConfig& c) {
    const auto decay = std::isinf(c.detector.decay.K) ? json("inf") : json(c.detector.decay.K);
    return {
        {"embedder",
         {{"kind", c.embedder.kind == EmbedderKind::Remote ? "remote" : "synthetic"},
          {"endpoint", c.embedder.endpoint},
          {"model", c.embedder.model_id},
          {"instruction", c.embedder.instruction},
          {"dim", c.embedder.dim},
          {"seed", c.embedder.seed},
          {"timeout_ms", c.embedder.timeout_ms},
          {"max_retries", c.embedder.max_retries},
          {"backoff_ms", c.embedder.backoff_ms},
          {"batch_size", c.embedder.batch_size},
          {"cache_file", c.cache_file}}},
        {"similarity",
         {{"measure", to_string(c.detector.measure)},
          {"pca", c.detector.use_pca},
          {"interval", {c.detector.interval.a, c.detector.interval.b}},
          {"K", decay}}},
        {"pca", {{"model_file", c.pca_file}}},
        {"generator",
         [&] {
             json g = policy_json(c.generator_policy);
             g["kind"] = c.generator_kind;
             g["endpoint"] = c.generator.llm_endpoint;
             g["model"] = c.generator.model_id;
             g["n_max"] = c.generator.n_max;
             g["candidates_per_round"] = c.generator.candidates_per_round;
             g["seed"] = c.generator_seed;
             g["sampling"] = {{"temperature", c.generator.sampling.temperature},
                              {"repetition_penalty", c.generator.sampling.repetition_penalty},
                              {"min_new_tokens", c.generator.sampling.min_new_tokens},
                              {"max_new_tokens", c.generator.sampling.max_new_tokens}};
             return g;
         }()},
        {"detector",
         [&] {
             json d = {{"calibration_file", c.calibration_file},
                       {"fp_target", c.fp_target},
                       {"min_sentences", c.detector.min_sentences}};
             if (!std::isnan(c.detector.p0)) d["p0"] = c.detector.p0;
             if (!std::isnan(c.detector.beta)) d["beta"] = c.detector.beta;
             return d;
         }()},
        {"attack",
         [&] {
             json a = policy_json(c.paraphraser_policy);
             a["paraphraser"] = c.paraphraser_kind;
             a["endpoint"] = c.attack.paraphraser_endpoint;
             a["n_candidates"] = c.attack.n_candidates;
             a["p"] = c.attack.p;
             a["seed"] = c.attack.rng_seed;
             a["mode"] = mode_name(c.attack.mode);
             a["objective"] = to_string(c.attack.objective);
             a["swap_rate"] = c.swap_rate;
             return a;
         }()},
        {"log_level", c.log_level},
    };
}

Runtime load_runtime(const AppConfig& config, bool require_calibration) {
    Runtime rt;
    rt.detector = config.detector;
    rt.generator = config.generator;

    std::shared_ptr<EmbeddingCache> cache;
    if (!config.cache_file.empty()) cache = std::make_shared<EmbeddingCache>(config.cache_file);
    rt.embedder = make_embedder(config.embedder, cache);

    if (config.detector.use_pca) {
        if (config.pca_file.empty()) throw Error(Errc::InvalidConfig, "PCA is enabled but pca.model_file is not set");
        auto pca = std::make_shared<const PcaModel>(load_pca(config.pca_file));
        require_provenance(*pca, config.embedder);
        if (pca->input_dim() != config.embedder.dim)
            mismatch("PCA input dimension differs from the embedder dimension");
        rt.detector.pca = pca;
        rt.generator.pca = pca;
    }

    if (!config.calibration_file.empty()) {
        auto cal = std::make_shared<const CalibrationModel>(load_calibration(config.calibration_file));
        if (cal->model_id != config.embedder.model_id)
            mismatch("calibration embedder '" + cal->model_id + "' differs from '" + config.embedder.model_id + "'");
        if (cal->instruction != config.embedder.instruction) mismatch("calibration instruction differs from the embedder's");
        if (cal->measure != config.detector.measure || cal->use_pca != config.detector.use_pca)
            mismatch("calibration similarity settings differ from the config");
        if (cal->interval.a != config.detector.interval.a || cal->interval.b != config.detector.interval.b)
            mismatch("calibration interval differs from the configured interval");
        if (cal->decay != config.detector.decay.K) mismatch("calibration decay factor differs from the config");
        if (std::isnan(rt.detector.p0)) rt.detector.p0 = cal->p0;
        if (std::isnan(rt.detector.beta)) rt.detector.beta = cal->beta_for(config.fp_target);
        rt.calibration = std::move(cal);
    }

    rt.generator.validate();
    if (require_calibration) rt.detector.validate();
    else rt.detector.validate_scoring();
    return rt;
}

json provenance(const Runtime& rt) {
    const auto& spec = rt.embedder->spec();
    json p = {{"embedder_model", spec.model_id},
              {"instruction", spec.instruction},
              {"measure", to_string(rt.detector.measure)},
              {"use_pca", rt.detector.use_pca},
              {"interval", {rt.detector.interval.a, rt.detector.interval.b}},
              {"K", std::isinf(rt.detector.decay.K) ? json("inf") : json(rt.detector.decay.K)},
              {"p0", rt.detector.p0},
              {"beta", rt.detector.beta},
              {"min_sentences", rt.detector.min_sentences}};
    if (rt.detector.pca) p["pca_fit_corpus"] = rt.detector.pca->fit_corpus_id;
    if (rt.calibration) p["calibration_corpus"] = rt.calibration->corpus_id;
    return p;
}

std::unique_ptr<TextGenerator> make_generator(const AppConfig& config) {
    if (config.generator_kind == "scripted")
        return std::make_unique<RandomSentenceGenerator>(config.generator_seed, 8, 16);
    if (config.generator.llm_endpoint.empty()) throw Error(Errc::InvalidConfig, "generator endpoint is not set");
    return std::make_unique<RemoteGenerator>(config.generator.llm_endpoint, config.generator_policy);
}

std::unique_ptr<Paraphraser> make_paraphraser(const AppConfig& config) {
    if (config.paraphraser_kind == "scripted")
        return std::make_unique<WordSwapParaphraser>(config.attack.rng_seed, config.swap_rate);
    if (config.attack.paraphraser_endpoint.empty()) throw Error(Errc::InvalidConfig, "paraphraser endpoint is not set");
    return std::make_unique<RemoteParaphraser>(config.attack.paraphraser_endpoint, config.paraphraser_policy);
}

} // namespace simmark
