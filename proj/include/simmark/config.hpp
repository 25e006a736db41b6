#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "simmark/attacks.hpp"
#include "simmark/calibration.hpp"
#include "simmark/detection.hpp"
#include "simmark/embedding.hpp"
#include "simmark/generation.hpp"
#include "simmark/http_client.hpp"

namespace simmark {

/// Everything a CLI run or the service needs, read from one JSON file.
/// Paths are resolved against the directory of that file.
struct AppConfig {
    EmbedderSpec embedder;
    std::string cache_file;

    std::string generator_kind = "remote"; // remote | scripted
    GeneratorConfig generator;
    http::RetryPolicy generator_policy;
    std::uint64_t generator_seed = 0;

    DetectorConfig detector;
    std::string pca_file;
    std::string calibration_file;
    double fp_target = 0.05;

    AttackSpec attack;
    std::string paraphraser_kind = "remote"; // remote | scripted
    http::RetryPolicy paraphraser_policy;
    double swap_rate = 0.3;

    std::string log_level = "info";
};

/// Parses the config object. Relative paths are resolved against `base_dir`.
AppConfig app_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Reads `path` and applies environment overrides.
AppConfig load_app_config(const std::string& path);

/// SIMMARK_EMBED_ENDPOINT, SIMMARK_LLM_ENDPOINT, SIMMARK_PARAPHRASE_ENDPOINT and SIMMARK_API_KEY.
void apply_env_overrides(AppConfig& config);

/// Serializable view of the config. Secrets are left out.
nlohmann::json to_json(const AppConfig& config);

/// Loaded models and clients shared by the commands.
struct Runtime {
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<const CalibrationModel> calibration;
    DetectorConfig detector;
    GeneratorConfig generator;
};

/// Loads the PCA and calibration files and checks that they were produced
/// under the configured embedder and similarity settings. Mismatches throw
/// ProvenanceMismatch. With `require_calibration`, detection must end up with
/// p0 and beta from the calibration file or the config.
Runtime load_runtime(const AppConfig& config, bool require_calibration);

/// Provenance summary reported by the service health check.
nlohmann::json provenance(const Runtime& runtime);

std::unique_ptr<TextGenerator> make_generator(const AppConfig& config);
std::unique_ptr<Paraphraser> make_paraphraser(const AppConfig& config);

} // namespace simmark
