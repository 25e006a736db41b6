#pragma once

#include <string>
#include <vector>

#include "simmark/simmetrics.hpp"

namespace simmark {

struct IntervalPreset {
    std::string name;
    SimilarityMeasure measure = SimilarityMeasure::Cosine;
    bool use_pca = false;
    Interval interval;
};

/// Presets shipped in data/interval_presets.json.
const std::vector<IntervalPreset>& builtin_presets();

/// Throws InvalidConfig for unknown names.
const IntervalPreset& find_preset(const std::string& name);

/// The non-Gemma preset for a measure/PCA combination.
const IntervalPreset& default_preset(SimilarityMeasure measure, bool use_pca);

} // namespace simmark
