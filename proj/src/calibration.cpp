#include "simmark/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "simmark/io.hpp"

namespace simmark {

SimilarityHistogram build_histogram(std::span<const double> similarities, double lo, double hi) {
    if (similarities.size() < kMinHistogramSamples)
        throw Error(Errc::InsufficientSamples,
                    fmt::format("histogram needs at least {} samples, got {}", kMinHistogramSamples, similarities.size()));
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
        throw Error(Errc::InvalidRequest, "histogram range needs finite lo < hi");

    SimilarityHistogram hist;
    hist.lo = lo;
    hist.hi = hi;
    hist.counts.assign(kHistogramBins, 0);
    hist.edges.resize(kHistogramBins + 1);
    const double width = (hi - lo) / static_cast<double>(kHistogramBins);
    for (std::size_t i = 0; i < kHistogramBins; ++i) hist.edges[i] = lo + static_cast<double>(i) * width;
    hist.edges[kHistogramBins] = hi;

    for (double s : similarities) {
        if (!std::isfinite(s)) throw Error(Errc::InvalidRequest, "non-finite similarity");
        const double pos = std::floor((s - lo) / width);
        const auto bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(kHistogramBins - 1)));
        ++hist.counts[bin];
    }
    hist.total = similarities.size();
    return hist;
}

std::pair<double, double> default_histogram_range(SimilarityMeasure measure, std::span<const double> similarities) {
    if (measure == SimilarityMeasure::Cosine) return {-1.0, 1.0};
    double max = 0.0;
    for (double s : similarities) max = std::max(max, s);
    return {0.0, max > 0.0 ? 1.1 * max : 1.0};
}

double interval_mass(const SimilarityHistogram& hist, const Interval& interval) {
    if (hist.total == 0) return 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double left = hist.edges[i];
        const double right = hist.edges[i + 1];
        const double overlap = std::min(interval.b, right) - std::max(interval.a, left);
        if (overlap <= 0.0 || hist.counts[i] == 0) continue;
        mass += static_cast<double>(hist.counts[i]) * std::min(1.0, overlap / (right - left));
    }
    return mass / static_cast<double>(hist.total);
}

double estimate_p0(const SimilarityHistogram& hist, const Interval& interval) {
    if (interval.b < hist.lo || interval.a > hist.hi)
        throw Error(Errc::NoOverlap, fmt::format("interval [{}, {}] misses histogram range [{}, {}]", interval.a,
                                                 interval.b, hist.lo, hist.hi));
    return std::clamp(interval_mass(hist, interval), kP0Clamp, 1.0 - kP0Clamp);
}

double sweep_beta(std::span<const double> z_scores, double fp_target) {
    if (!(fp_target > 0.0 && fp_target < 1.0)) throw Error(Errc::InvalidRequest, "fp_target must lie in (0, 1)");
    if (z_scores.empty()) throw Error(Errc::InsufficientSamples, "no scores to sweep");
    std::vector<double> sorted(z_scores.begin(), z_scores.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    const auto steps = static_cast<long>(std::lround((kBetaGridHi - kBetaGridLo) / kBetaGridStep));
    const long zero = std::lround(-kBetaGridLo / kBetaGridStep);
    for (long i = 0; i <= steps; ++i) {
        // Integer grid index keeps every grid point (0.0 in particular) exact.
        const double beta = static_cast<double>(i - zero) / 1000.0;
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), beta);
        if (static_cast<double>(above) / n <= fp_target) return beta;
    }
    throw Error(Errc::TargetUnreachable,
                fmt::format("even beta = {} flags more than {} of the scores", kBetaGridHi, fp_target));
}

double compute_beta(std::span<const double> human_z_scores, double fp_target) {
    if (human_z_scores.size() < kMinBetaScores)
        throw Error(Errc::InsufficientSamples,
                    fmt::format("beta calibration needs at least {} scores, got {}", kMinBetaScores,
                                human_z_scores.size()));
    return sweep_beta(human_z_scores, fp_target);
}

IntervalCandidate evaluate_interval(const SimilarityHistogram& human_hist, const Interval& interval,
                                    const SimilarityHistogram* generator_hist) {
    IntervalCandidate c;
    c.interval = interval;
    c.p0 = estimate_p0(human_hist, interval);
    const double accept = generator_hist ? interval_mass(*generator_hist, interval) : c.p0;
    c.expected_samples = accept > 0.0 ? 1.0 / accept : std::numeric_limits<double>::infinity();
    return c;
}

std::vector<IntervalCandidate> explore_intervals(const SimilarityHistogram& human_hist,
                                                 std::span<const double> candidate_widths,
                                                 const ExploreOptions& options) {
    const double range = human_hist.hi - human_hist.lo;
    const double step = options.step > 0.0 ? options.step : range / 100.0;
    std::vector<IntervalCandidate> out;
    for (double width : candidate_widths) {
        if (!(width > 0.0) || width > range + 1e-12) continue;
        for (long k = 0;; ++k) {
            const double a = human_hist.lo + static_cast<double>(k) * step;
            if (a + width > human_hist.hi + 1e-12) break;
            auto c = evaluate_interval(human_hist, Interval(a, a + width), options.generator_hist);
            if (c.expected_samples <= options.budget) out.push_back(c);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const IntervalCandidate& x, const IntervalCandidate& y) {
        if (x.p0 != y.p0) return x.p0 < y.p0;
        return x.expected_samples < y.expected_samples;
    });
    return out;
}

double CalibrationModel::beta_for(double fp_target) const {
    if (auto it = beta_table.find(fp_target); it != beta_table.end()) return it->second;
    throw Error(Errc::InvalidConfig, fmt::format("calibration has no beta for FP target {}", fp_target));
}

nlohmann::json to_json(const SimilarityHistogram& hist) {
    return {{"lo", hist.lo}, {"hi", hist.hi}, {"bin_edges", hist.edges}, {"counts", hist.counts}, {"total", hist.total}};
}

SimilarityHistogram histogram_from_json(const nlohmann::json& j) {
    try {
        SimilarityHistogram hist;
        hist.lo = j.at("lo").get<double>();
        hist.hi = j.at("hi").get<double>();
        hist.counts = j.at("counts").get<std::vector<std::uint64_t>>();
        hist.total = j.at("total").get<std::uint64_t>();
        if (j.contains("bin_edges")) {
            hist.edges = j.at("bin_edges").get<std::vector<double>>();
        } else {
            const double width = (hist.hi - hist.lo) / static_cast<double>(hist.counts.size());
            for (std::size_t i = 0; i < hist.counts.size(); ++i) hist.edges.push_back(hist.lo + static_cast<double>(i) * width);
            hist.edges.push_back(hist.hi);
        }
        if (hist.edges.size() != hist.counts.size() + 1 || hist.counts.empty())
            throw Error(Errc::ParseError, "histogram edges and counts disagree");
        std::uint64_t sum = 0;
        for (auto c : hist.counts) sum += c;
        if (sum != hist.total) throw Error(Errc::ParseError, "histogram counts do not sum to total");
        return hist;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("histogram: ") + e.what());
    }
}

nlohmann::json to_json(const CalibrationModel& m) {
    nlohmann::json betas = nlohmann::json::array();
    for (const auto& [fp, beta] : m.beta_table) betas.push_back({{"fp_target", fp}, {"beta", beta}});
    return {{"format", "simmark-calibration"},
            {"version", 1},
            {"p0", m.p0},
            {"beta_table", betas},
            {"histogram", to_json(m.histogram)},
            {"provenance",
             {{"corpus_id", m.corpus_id},
              {"model_id", m.model_id},
              {"instruction", m.instruction},
              {"measure", to_string(m.measure)},
              {"use_pca", m.use_pca},
              {"interval", {m.interval.a, m.interval.b}},
              {"K", std::isinf(m.decay) ? nlohmann::json("inf") : nlohmann::json(m.decay)},
              {"documents", m.documents}}}};
}

CalibrationModel calibration_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "simmark-calibration") throw Error(Errc::ParseError, "not a calibration model");
        CalibrationModel m;
        m.p0 = j.at("p0").get<double>();
        for (const auto& row : j.at("beta_table"))
            m.beta_table[row.at("fp_target").get<double>()] = row.at("beta").get<double>();
        m.histogram = histogram_from_json(j.at("histogram"));
        const auto& p = j.at("provenance");
        m.corpus_id = p.at("corpus_id").get<std::string>();
        m.model_id = p.at("model_id").get<std::string>();
        m.instruction = p.value("instruction", "");
        m.measure = parse_measure(p.at("measure").get<std::string>());
        m.use_pca = p.at("use_pca").get<bool>();
        m.interval = Interval(p.at("interval").at(0).get<double>(), p.at("interval").at(1).get<double>());
        if (p.contains("K")) {
            const auto& k = p["K"];
            m.decay = k.is_string() && k == "inf" ? std::numeric_limits<double>::infinity() : k.get<double>();
        }
        m.documents = p.value("documents", std::size_t{0});
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, std::string("calibration model: ") + e.what());
    }
}

void save_calibration(const CalibrationModel& model, const std::string& path) {
    io::write_json(path, to_json(model));
}

CalibrationModel load_calibration(const std::string& path) { return calibration_from_json(io::read_json(path)); }

CalibrationModel calibrate_from_similarities(const DetectorConfig& config,
                                             std::span<const std::vector<double>> doc_similarities,
                                             std::span<const double> fp_targets) {
    config.validate_scoring();
    std::vector<double> all;
    for (const auto& doc : doc_similarities) all.insert(all.end(), doc.begin(), doc.end());
    const auto [lo, hi] = default_histogram_range(config.measure, all);

    CalibrationModel model;
    model.histogram = build_histogram(all, lo, hi);
    model.p0 = estimate_p0(model.histogram, config.interval);
    model.measure = config.measure;
    model.use_pca = config.use_pca;
    model.interval = config.interval;
    model.decay = config.decay.K;
    model.documents = doc_similarities.size();

    DetectorConfig scoring = config;
    scoring.p0 = model.p0;
    scoring.beta = 0.0;
    std::vector<double> z;
    for (const auto& doc : doc_similarities) {
        if (doc.empty() || doc.size() < config.min_sentences) continue;
        z.push_back(score_similarities(scoring, doc).z_soft);
    }
    for (double fp : fp_targets) model.beta_table[fp] = compute_beta(z, fp);
    return model;
}

CalibrationModel calibrate(const DetectorConfig& config, Embedder& embedder, std::span<const std::string> human_texts,
                           std::span<const double> fp_targets, const std::string& corpus_id) {
    std::vector<std::vector<double>> sims;
    sims.reserve(human_texts.size());
    for (const auto& text : human_texts) {
        try {
            sims.push_back(pair_similarities(config, embedder, split_sentences(text)));
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyText) throw;
        }
    }
    CalibrationModel model = calibrate_from_similarities(config, sims, fp_targets);
    model.corpus_id = corpus_id;
    model.model_id = embedder.spec().model_id;
    model.instruction = embedder.spec().instruction;
    return model;
}

} // namespace simmark
