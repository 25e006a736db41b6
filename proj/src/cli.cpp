#include "simmark/cli.hpp"

#include <csignal>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "simmark/attacks.hpp"
#include "simmark/calibration.hpp"
#include "simmark/config.hpp"
#include "simmark/evaluation.hpp"
#include "simmark/io.hpp"
#include "simmark/projection.hpp"
#include "simmark/rng.hpp"
#include "simmark/service.hpp"
#include "simmark/simulation.hpp"

namespace simmark::cli {
namespace {

using nlohmann::json;

void setup_logging(const std::string& level) {
    auto logger = spdlog::get("simmark");
    if (!logger) {
        logger = spdlog::stderr_color_mt("simmark");
        spdlog::set_default_logger(logger);
    }
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && level != "off")
        throw Error(Errc::InvalidConfig, "unknown log level '" + level + "'");
    spdlog::set_level(parsed);
}

/// Writes to `path`, or to stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        io::write_atomic(path, content);
    }
}

std::string jsonl(const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) out += r.dump() + '\n';
    return out;
}

AppConfig config_or_default(const std::string& path) {
    if (!path.empty()) return load_app_config(path);
    AppConfig c = app_config_from_json(json::object());
    apply_env_overrides(c);
    return c;
}

DetectionService* g_service = nullptr;

extern "C" void handle_stop_signal(int) {
    if (g_service) g_service->stop();
}

struct Options {
    std::string log_level;
    std::string config;
    std::string in;
    std::string out;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    // generate
    std::string prompt_file;
    int sentences = 0;
    std::string trace_out;

    // calibrate
    std::string human_corpus;
    std::vector<double> fps;
    std::string corpus_id;

    // intervals
    std::string histogram;
    std::string generator_histogram;
    std::vector<double> widths;
    double budget = 10.0;
    double step = 0.0;

    // attack
    std::string kind;
    int n = 0;
    double p = -1.0;
    std::string mode;
    std::string objective;
    std::string paraphraser;

    // fit-pca
    int k = 16;

    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
};

int cmd_generate(const Options& o) {
    AppConfig cfg = load_app_config(o.config);
    if (o.seed) cfg.generator_seed = o.seed;
    setup_logging(o.log_level.empty() ? cfg.log_level : o.log_level);
    cfg.calibration_file.clear();
    const Runtime rt = load_runtime(cfg, false);
    auto generator = make_generator(cfg);
    const std::string prompt = io::read_file(o.prompt_file);
    spdlog::info("generating {} sentences", o.sentences);
    const auto trace = generate_document(rt.generator, *generator, *rt.embedder, prompt, o.sentences);
    if (!o.trace_out.empty()) io::write_json(o.trace_out, to_json(trace));
    emit(o.out, trace.text() + '\n');
    return 0;
}

int cmd_detect(const Options& o) {
    const AppConfig cfg = load_app_config(o.config);
    setup_logging(o.log_level.empty() ? cfg.log_level : o.log_level);
    const Runtime rt = load_runtime(cfg, true);
    const auto corpus = io::read_corpus(o.in);
    std::vector<json> out(corpus.size());
    parallel_for(corpus.size(), o.threads, [&](std::size_t i) {
        json r = to_json(detect(rt.detector, *rt.embedder, corpus[i].text));
        r["id"] = corpus[i].id;
        if (corpus[i].label) r["label"] = *corpus[i].label;
        out[i] = std::move(r);
    });
    spdlog::info("scored {} documents", out.size());
    emit(o.out, jsonl(out));
    return 0;
}

int cmd_calibrate(const Options& o) {
    AppConfig cfg = load_app_config(o.config);
    setup_logging(o.log_level.empty() ? cfg.log_level : o.log_level);
    cfg.calibration_file.clear();
    const Runtime rt = load_runtime(cfg, false);
    std::vector<std::string> texts;
    for (auto& r : io::read_corpus(o.human_corpus)) texts.push_back(std::move(r.text));
    const std::vector<double> fps = o.fps.empty() ? std::vector<double>{0.01, 0.05} : o.fps;
    const std::string id =
        o.corpus_id.empty() ? std::filesystem::path(o.human_corpus).stem().string() : o.corpus_id;
    const auto model = calibrate(rt.detector, *rt.embedder, texts, fps, id);
    spdlog::info("p0 = {:.6f} from {} documents", model.p0, model.documents);
    save_calibration(model, o.out);
    return 0;
}

SimilarityHistogram histogram_file(const std::string& path) {
    const json j = io::read_json(path);
    if (j.contains("format") && j["format"] == "simmark-calibration") return calibration_from_json(j).histogram;
    return histogram_from_json(j);
}

int cmd_intervals(const Options& o) {
    setup_logging(o.log_level.empty() ? "info" : o.log_level);
    const auto human = histogram_file(o.histogram);
    std::optional<SimilarityHistogram> generator;
    if (!o.generator_histogram.empty()) generator = histogram_file(o.generator_histogram);
    ExploreOptions options;
    options.budget = o.budget;
    options.step = o.step;
    options.generator_hist = generator ? &*generator : nullptr;
    const auto candidates = explore_intervals(human, o.widths, options);
    json out = json::array();
    for (const auto& c : candidates)
        out.push_back({{"interval", {c.interval.a, c.interval.b}}, {"p0", c.p0}, {"expected_samples", c.expected_samples}});
    emit(o.out, out.dump(2) + '\n');
    return 0;
}

int cmd_attack(const Options& o) {
    AppConfig cfg = config_or_default(o.config);
    setup_logging(o.log_level.empty() ? cfg.log_level : o.log_level);
    AttackSpec spec = parse_attack_kind(o.kind);
    const AttackSpec defaults = cfg.attack;
    spec.paraphraser_endpoint = defaults.paraphraser_endpoint;
    spec.n_candidates = o.n > 0 ? o.n : defaults.n_candidates;
    spec.p = o.p >= 0.0 ? o.p : defaults.p;
    spec.rng_seed = o.seed ? o.seed : defaults.rng_seed;
    spec.prompt_template = defaults.prompt_template;
    spec.bigram_template = defaults.bigram_template;
    spec.mode = defaults.mode;
    if (o.mode == "edit-distance") spec.mode = AdversaryMode::EditDistance;
    else if (o.mode == "detector-aware") spec.mode = AdversaryMode::DetectorAware;
    else if (!o.mode.empty()) throw Error(Errc::InvalidConfig, "unknown adversary mode '" + o.mode + "'");
    spec.objective = o.objective.empty() ? defaults.objective : parse_bigram_objective(o.objective);
    if (!o.paraphraser.empty()) cfg.paraphraser_kind = o.paraphraser;
    cfg.attack.rng_seed = spec.rng_seed;

    std::vector<AttackKind> steps = spec.steps.empty() ? std::vector<AttackKind>{spec.kind} : spec.steps;
    const bool needs_paraphraser = std::any_of(steps.begin(), steps.end(), [](AttackKind k) {
        return k == AttackKind::Paraphrase || k == AttackKind::Bigram;
    });
    const bool needs_detector = spec.mode == AdversaryMode::DetectorAware &&
                                std::find(steps.begin(), steps.end(), AttackKind::Bigram) != steps.end();
    std::unique_ptr<Paraphraser> paraphraser;
    if (needs_paraphraser) paraphraser = make_paraphraser(cfg);
    std::optional<Runtime> rt;
    if (needs_detector) {
        // Only the running-z objective reads p0 from the calibration.
        const bool wants_p0 = spec.objective == BigramObjective::RunningZ;
        if (!wants_p0) cfg.calibration_file.clear();
        rt = load_runtime(cfg, wants_p0);
    }

    const auto corpus = io::read_corpus(o.in);
    std::vector<json> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        AttackSpec doc_spec = spec;
        doc_spec.rng_seed = rng::derive_seed(spec.rng_seed, i);
        const std::string text = apply_attack(doc_spec, corpus[i].text, paraphraser.get(),
                                              rt ? &rt->detector : nullptr, rt ? rt->embedder.get() : nullptr);
        json r = {{"id", corpus[i].id}, {"text", text}};
        if (corpus[i].label) r["label"] = *corpus[i].label;
        out.push_back(std::move(r));
    }
    spdlog::info("attacked {} documents with {}", out.size(), o.kind);
    emit(o.out, jsonl(out));
    return 0;
}

int cmd_eval(const Options& o) {
    setup_logging(o.log_level.empty() ? "info" : o.log_level);
    const auto corpus = scored_corpus_from_jsonl(io::read_jsonl(o.in));
    const std::vector<double> fps = o.fps.empty() ? std::vector<double>{0.01, 0.05} : o.fps;
    emit(o.out, to_json(summarize(corpus, fps)).dump(2) + '\n');
    return 0;
}

int cmd_simulate(const Options& o) {
    setup_logging(o.log_level.empty() ? "info" : o.log_level);
    SimulationConfig cfg = o.config.empty() ? SimulationConfig{} : simulation_config_from_json(io::read_json(o.config));
    if (o.threads) cfg.threads = o.threads;
    spdlog::info("simulating {} + {} documents, seed {}", cfg.n_human, cfg.n_watermarked, o.seed);
    const auto result = run_simulation_study(cfg, o.seed);
    json j = to_json(result);
    j["config"] = to_json(cfg);
    j["seed"] = o.seed;
    emit(o.out, j.dump(2) + '\n');
    return 0;
}

int cmd_serve(const Options& o) {
    const AppConfig cfg = load_app_config(o.config);
    setup_logging(o.log_level.empty() ? cfg.log_level : o.log_level);
    DetectionService service(load_runtime(cfg, true));
    const int port = service.bind(o.host, o.port);
    spdlog::info("listening on {}:{}", o.host, port);
    g_service = &service;
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    service.listen();
    g_service = nullptr;
    return 0;
}

int cmd_fit_pca(const Options& o) {
    AppConfig cfg = load_app_config(o.config);
    setup_logging(o.log_level.empty() ? cfg.log_level : o.log_level);
    cfg.detector.use_pca = false;
    cfg.generator.use_pca = false;
    cfg.calibration_file.clear();
    const Runtime rt = load_runtime(cfg, false);
    std::vector<std::string> sentences;
    for (const auto& r : io::read_corpus(o.in))
        for (auto& s : split_sentences(r.text).texts()) sentences.push_back(std::move(s));
    if (sentences.empty()) throw Error(Errc::InsufficientData, "corpus has no sentences");
    const auto vectors = rt.embedder->embed(sentences);
    PcaModel model = pca_fit(std::span<const Embedding>(vectors), o.k);
    model.fit_corpus_id = o.corpus_id.empty() ? std::filesystem::path(o.in).stem().string() : o.corpus_id;
    model.model_id = rt.embedder->spec().model_id;
    model.instruction = rt.embedder->spec().instruction;
    spdlog::info("fitted {} components on {} sentences", o.k, sentences.size());
    save_pca(model, o.out);
    return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
    Options o;
    CLI::App app{"Sentence-level semantic watermarking: generation, detection, calibration and attacks", "simmark"};
    app.require_subcommand(1, 1);
    app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off");

    auto* generate = app.add_subcommand("generate", "Generate a watermarked continuation of a prompt");
    generate->add_option("--config", o.config, "Config file")->required()->check(CLI::ExistingFile);
    generate->add_option("--prompt-file", o.prompt_file, "Prompt text")->required()->check(CLI::ExistingFile);
    generate->add_option("--sentences", o.sentences, "Sentences to generate")->required()->check(CLI::PositiveNumber);
    generate->add_option("--trace-out", o.trace_out, "Generation trace (JSON)");
    generate->add_option("--out", o.out, "Generated text (default stdout)");
    generate->add_option("--seed", o.seed, "Seed for the scripted generator");

    auto* detect_cmd = app.add_subcommand("detect", "Score documents");
    detect_cmd->add_option("--config", o.config, "Config file")->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--in", o.in, "Corpus (JSON lines with id, text)")->required()->check(CLI::ExistingFile);
    detect_cmd->add_option("--out", o.out, "Reports (JSON lines, default stdout)");
    detect_cmd->add_option("--threads", o.threads, "Worker threads (0: all cores)");

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Estimate p0 and beta on human text");
    calibrate_cmd->add_option("--config", o.config, "Config file")->required()->check(CLI::ExistingFile);
    calibrate_cmd->add_option("--human-corpus", o.human_corpus, "Human corpus (JSON lines)")->required()->check(CLI::ExistingFile);
    calibrate_cmd->add_option("--fp", o.fps, "False-positive target (repeatable, default 0.01 and 0.05)");
    calibrate_cmd->add_option("--out", o.out, "Calibration model (JSON)")->required();
    calibrate_cmd->add_option("--corpus-id", o.corpus_id, "Corpus name recorded as provenance");

    auto* intervals = app.add_subcommand("intervals", "Rank candidate intervals on a similarity histogram");
    intervals->add_option("--histogram", o.histogram, "Histogram or calibration model (JSON)")->required()->check(CLI::ExistingFile);
    intervals->add_option("--widths", o.widths, "Interval widths, comma separated")->required()->delimiter(',');
    intervals->add_option("--generator-histogram", o.generator_histogram, "Histogram of unwatermarked generator output")
        ->check(CLI::ExistingFile);
    intervals->add_option("--budget", o.budget, "Maximum expected samples per sentence")->capture_default_str();
    intervals->add_option("--step", o.step, "Placement step (0: 1% of the range)")->capture_default_str();
    intervals->add_option("--out", o.out, "Ranked candidates (JSON, default stdout)");

    auto* attack = app.add_subcommand("attack", "Apply a paraphrase, bigram, drop or merge attack");
    attack->add_option("--config", o.config, "Config file")->check(CLI::ExistingFile);
    attack->add_option("--kind", o.kind, "paraphrase, bigram, drop, merge, or steps joined by '+'")->required();
    attack->add_option("--n", o.n, "Paraphrase candidates per sentence");
    attack->add_option("--p", o.p, "Drop or merge probability");
    attack->add_option("--mode", o.mode, "Bigram adversary: detector-aware or edit-distance");
    attack->add_option("--objective", o.objective, "Detector-aware target: soft-count, hard-count or running-z");
    attack->add_option("--paraphraser", o.paraphraser, "remote or scripted");
    attack->add_option("--in", o.in, "Corpus (JSON lines)")->required()->check(CLI::ExistingFile);
    attack->add_option("--out", o.out, "Attacked corpus (JSON lines, default stdout)");
    attack->add_option("--seed", o.seed, "Random seed");

    auto* eval = app.add_subcommand("eval", "ROC-AUC and TP at fixed FP from scored documents");
    eval->add_option("--scores", o.in, "Scores (JSON lines with label, z_soft)")->required()->check(CLI::ExistingFile);
    eval->add_option("--fp", o.fps, "False-positive target (repeatable, default 0.01 and 0.05)");
    eval->add_option("--out", o.out, "Summary (JSON, default stdout)");

    auto* simulate = app.add_subcommand("simulate", "Run the synthetic end-to-end study");
    simulate->add_option("--config", o.config, "Simulation config (JSON)")->check(CLI::ExistingFile);
    o.seed = 1;
    simulate->add_option("--seed", o.seed, "Root seed")->capture_default_str();
    simulate->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    simulate->add_option("--out", o.out, "Result (JSON, default stdout)");

    auto* serve = app.add_subcommand("serve", "Serve detection over HTTP");
    serve->add_option("--config", o.config, "Config file")->required()->check(CLI::ExistingFile);
    serve->add_option("--host", o.host, "Bind address")->capture_default_str();
    serve->add_option("--port", o.port, "Port (0 picks a free one)")->capture_default_str();

    auto* fit_pca = app.add_subcommand("fit-pca", "Fit a PCA projection on corpus sentence embeddings");
    fit_pca->add_option("--config", o.config, "Config file")->required()->check(CLI::ExistingFile);
    fit_pca->add_option("--corpus", o.in, "Corpus (JSON lines)")->required()->check(CLI::ExistingFile);
    fit_pca->add_option("--k", o.k, "Components")->capture_default_str()->check(CLI::PositiveNumber);
    fit_pca->add_option("--out", o.out, "PCA model (JSON)")->required();
    fit_pca->add_option("--corpus-id", o.corpus_id, "Corpus name recorded as provenance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n";
        const auto parsed = app.get_subcommands();
        std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
        return 1;
    }

    try {
        if (generate->parsed()) return cmd_generate(o);
        if (detect_cmd->parsed()) return cmd_detect(o);
        if (calibrate_cmd->parsed()) return cmd_calibrate(o);
        if (intervals->parsed()) return cmd_intervals(o);
        if (attack->parsed()) return cmd_attack(o);
        if (eval->parsed()) return cmd_eval(o);
        if (simulate->parsed()) return cmd_simulate(o);
        if (serve->parsed()) return cmd_serve(o);
        if (fit_pca->parsed()) return cmd_fit_pca(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_runtime_failure(e.code()) ? 2 : 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    std::cerr << app.help();
    return 1;
}

} // namespace simmark::cli
