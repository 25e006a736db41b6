#include "simmark/presets.hpp"

#include <json.hpp>

#include "simmark/data_presets.hpp"

namespace simmark {

std::string_view to_string(SimilarityMeasure m) noexcept {
    return m == SimilarityMeasure::Cosine ? "cosine" : "euclidean";
}

SimilarityMeasure parse_measure(std::string_view name) {
    if (name == "cosine") return SimilarityMeasure::Cosine;
    if (name == "euclidean") return SimilarityMeasure::Euclidean;
    throw Error(Errc::InvalidConfig, "unknown similarity measure '" + std::string(name) + "'");
}

const std::vector<IntervalPreset>& builtin_presets() {
    static const std::vector<IntervalPreset> presets = [] {
        const auto doc = nlohmann::json::parse(data::kIntervalPresetsJson);
        std::vector<IntervalPreset> out;
        for (const auto& [name, p] : doc.at("presets").items()) {
            const auto& iv = p.at("interval");
            out.push_back({name, parse_measure(p.at("measure").get<std::string>()), p.at("use_pca").get<bool>(),
                           Interval(iv.at(0).get<double>(), iv.at(1).get<double>())});
        }
        return out;
    }();
    return presets;
}

const IntervalPreset& find_preset(const std::string& name) {
    for (const auto& p : builtin_presets())
        if (p.name == name) return p;
    throw Error(Errc::InvalidConfig, "unknown interval preset '" + name + "'");
}

const IntervalPreset& default_preset(SimilarityMeasure measure, bool use_pca) {
    std::string name(to_string(measure));
    if (use_pca) name += "-pca";
    return find_preset(name);
}

} // namespace simmark
