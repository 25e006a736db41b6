#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "simmark/error.hpp"
#include "simmark/calibration.hpp"
#include "simmark/cli.hpp"
#include "simmark/config.hpp"
#include "simmark/io.hpp"
#include "simmark/projection.hpp"
#include "simmark/simulation.hpp"
#include "support.hpp"

using namespace simmark;

namespace {

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "simmark");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json base_config() {
    return {{"embedder", {{"kind", "synthetic"}, {"dim", 32}, {"seed", 4}}},
            {"similarity", {{"measure", "cosine"}, {"interval", {0.0, 0.09}}, {"K", 250}}},
            {"generator", {{"kind", "scripted"}, {"n_max", 50}, {"seed", 9}}},
            {"detector", {{"min_sentences", 8}, {"fp_target", 0.05}}},
            {"attack", {{"paraphraser", "scripted"}, {"n_candidates", 4}}},
            {"log_level", "warn"}};
}

void write_corpus(const std::string& path, const std::vector<std::string>& texts, const std::string& label) {
    std::vector<nlohmann::json> rows;
    for (std::size_t i = 0; i < texts.size(); ++i)
        rows.push_back({{"id", label + std::to_string(i)}, {"text", texts[i]}, {"label", label}});
    io::write_jsonl(path, rows);
}

/// Temp dir holding a config, a human corpus and a calibration made from it.
struct Workspace {
    testing::TempDir dir{"cli"};
    std::string config = dir.file("config.json");

    Workspace() {
        SimulationConfig sim;
        sim.sentences_per_doc = 12;
        write_corpus(dir.file("human.jsonl"), synthesize_human_texts(sim, 1, 150), "human");
        io::write_json(config, base_config());
        REQUIRE(run_cli({"calibrate", "--config", config, "--human-corpus", dir.file("human.jsonl"), "--fp", "0.01",
                         "--fp", "0.05", "--out", dir.file("cal.json")}) == 0);
        auto j = base_config();
        j["detector"]["calibration_file"] = "cal.json";
        io::write_json(config, j);
    }
};

} // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"detect"}) == 1);
    CHECK(run_cli({"eval", "--scores", "/nonexistent/file.jsonl"}) == 1);
    CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("calibrate, detect and eval through the command line") {
    Workspace ws;
    const auto cal = load_calibration(ws.dir.file("cal.json"));
    CHECK(cal.corpus_id == "human");
    CHECK(cal.beta_table.size() == 2);

    // Watermarked documents from the scripted generator.
    std::ofstream(ws.dir.file("prompt.txt")) << "Bako tisu ramelo vipa kunoda sefi lotu.";
    REQUIRE(run_cli({"generate", "--config", ws.config, "--prompt-file", ws.dir.file("prompt.txt"), "--sentences", "12",
                     "--trace-out", ws.dir.file("trace.json"), "--out", ws.dir.file("generated.txt")}) == 0);
    const auto trace = io::read_json(ws.dir.file("trace.json"));
    CHECK(trace["sentences"].size() == 12);
    const std::string generated = io::read_file(ws.dir.file("generated.txt"));

    SimulationConfig sim;
    sim.sentences_per_doc = 12;
    auto texts = synthesize_human_texts(sim, 77, 5);
    std::vector<nlohmann::json> rows;
    for (std::size_t i = 0; i < texts.size(); ++i) rows.push_back({{"id", "h" + std::to_string(i)}, {"text", texts[i]}, {"label", "human"}});
    rows.push_back({{"id", "w0"}, {"text", generated}, {"label", "watermarked"}});
    io::write_jsonl(ws.dir.file("docs.jsonl"), rows);

    REQUIRE(run_cli({"detect", "--config", ws.config, "--in", ws.dir.file("docs.jsonl"), "--out",
                     ws.dir.file("reports.jsonl")}) == 0);
    const auto reports = io::read_jsonl(ws.dir.file("reports.jsonl"));
    REQUIRE(reports.size() == 6);
    CHECK(reports[0]["id"] == "h0");
    CHECK(reports[0]["N"] == 12);
    CHECK(reports[5]["verdict"] == "watermarked");
    CHECK(reports[5]["beta"] == cal.beta_for(0.05));

    REQUIRE(run_cli({"eval", "--scores", ws.dir.file("reports.jsonl"), "--out", ws.dir.file("summary.json")}) == 0);
    const auto summary = io::read_json(ws.dir.file("summary.json"));
    CHECK(summary["roc_auc"] == 1.0);

    REQUIRE(run_cli({"intervals", "--histogram", ws.dir.file("cal.json"), "--widths", "0.08,0.15", "--out",
                     ws.dir.file("intervals.json")}) == 0);
    CHECK(io::read_json(ws.dir.file("intervals.json")).is_array());
}

TEST_CASE("provenance mismatch is a startup error") {
    Workspace ws;
    auto j = io::read_json(ws.config);
    j["embedder"]["model"] = "other-model";
    io::write_json(ws.config, j);
    io::write_jsonl(ws.dir.file("docs.jsonl"), {{{"id", "a"}, {"text", "One two. Three four."}}});
    CHECK(run_cli({"detect", "--config", ws.config, "--in", ws.dir.file("docs.jsonl"), "--out", ws.dir.file("r.jsonl")}) == 1);
    try {
        load_runtime(load_app_config(ws.config), true);
        FAIL("expected ProvenanceMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ProvenanceMismatch);
    }
    CHECK_FALSE(std::filesystem::exists(ws.dir.file("r.jsonl")));
}

TEST_CASE("PCA fitted by the CLI is checked against the embedder") {
    Workspace ws;
    auto j = base_config();
    j["similarity"] = {{"measure", "euclidean"}, {"pca", true}};
    j["pca"] = {{"model_file", "pca.json"}};
    io::write_json(ws.config, j);
    REQUIRE(run_cli({"fit-pca", "--config", ws.config, "--corpus", ws.dir.file("human.jsonl"), "--k", "4", "--out",
                     ws.dir.file("pca.json")}) == 0);
    const auto pca = load_pca(ws.dir.file("pca.json"));
    CHECK(pca.output_dim() == 4);
    CHECK(pca.instruction == "Represent the sentence for PCA:");
    AppConfig cfg = load_app_config(ws.config);
    CHECK(load_runtime(cfg, false).detector.pca);
    cfg.embedder.instruction = "Represent the sentence for Euclidean distance:";
    CHECK_THROWS_AS(load_runtime(cfg, false), Error);
}

TEST_CASE("attack subcommand") {
    Workspace ws;
    REQUIRE(run_cli({"attack", "--kind", "drop", "--p", "0.5", "--seed", "3", "--in", ws.dir.file("human.jsonl"),
                     "--out", ws.dir.file("dropped.jsonl")}) == 0);
    const auto original = io::read_corpus(ws.dir.file("human.jsonl"));
    const auto dropped = io::read_corpus(ws.dir.file("dropped.jsonl"));
    REQUIRE(dropped.size() == original.size());
    CHECK(dropped[0].label == std::optional<std::string>("human"));
    CHECK(split_sentences(dropped[0].text).size() < split_sentences(original[0].text).size());

    REQUIRE(run_cli({"attack", "--config", ws.config, "--kind", "bigram", "--n", "3", "--in", ws.dir.file("human.jsonl"),
                     "--out", ws.dir.file("bigram.jsonl")}) == 0);
    CHECK(io::read_corpus(ws.dir.file("bigram.jsonl")).size() == original.size());

    CHECK(run_cli({"attack", "--kind", "merge", "--p", "0.7", "--in", ws.dir.file("human.jsonl")}) == 1);
}

TEST_CASE("remote failures exit 2") {
    testing::TempDir dir("cli-remote");
    auto j = base_config();
    j["generator"] = {{"kind", "remote"}, {"endpoint", "http://127.0.0.1:1"}, {"max_retries", 1}, {"backoff_ms", 1}};
    io::write_json(dir.file("config.json"), j);
    std::ofstream(dir.file("prompt.txt")) << "A prompt sentence.";
    CHECK(run_cli({"generate", "--config", dir.file("config.json"), "--prompt-file", dir.file("prompt.txt"),
                   "--sentences", "2"}) == 2);
}

TEST_CASE("environment overrides endpoints and secrets stay out of serialized config") {
    ::setenv("SIMMARK_LLM_ENDPOINT", "http://example.invalid:9", 1);
    ::setenv("SIMMARK_API_KEY", "secret-token", 1);
    testing::TempDir dir("cli-env");
    io::write_json(dir.file("config.json"), base_config());
    const auto cfg = load_app_config(dir.file("config.json"));
    ::unsetenv("SIMMARK_LLM_ENDPOINT");
    ::unsetenv("SIMMARK_API_KEY");
    CHECK(cfg.generator.llm_endpoint == "http://example.invalid:9");
    CHECK(cfg.embedder.api_key == "secret-token");
    CHECK(to_json(cfg).dump().find("secret-token") == std::string::npos);
}

TEST_CASE("config validation") {
    auto j = base_config();
    j["similarity"]["preset"] = "euclidean-pca";
    CHECK_THROWS_AS(app_config_from_json(j), Error);
    j = base_config();
    j["similarity"].erase("interval");
    CHECK(app_config_from_json(j).detector.interval == Interval(0.68, 0.76));
    j["generator"]["kind"] = "magic";
    CHECK_THROWS_AS(app_config_from_json(j), Error);
    j = base_config();
    j["similarity"]["K"] = "inf";
    CHECK(std::isinf(app_config_from_json(j).detector.decay.K));
}

TEST_CASE("simulate subcommand writes a summary") {
    testing::TempDir dir("cli-sim");
    io::write_json(dir.file("sim.json"), {{"n_calibration", 120}, {"n_human", 30}, {"n_watermarked", 30}, {"sentences_per_doc", 10}});
    REQUIRE(run_cli({"simulate", "--config", dir.file("sim.json"), "--seed", "2", "--out", dir.file("out.json")}) == 0);
    const auto out = io::read_json(dir.file("out.json"));
    CHECK(out["seed"] == 2);
    CHECK(out["summary"]["roc_auc"].get<double>() > 0.9);
}
