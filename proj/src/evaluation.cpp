#include "simmark/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "simmark/calibration.hpp"
#include "simmark/error.hpp"

namespace simmark {

std::string_view to_string(Label label) noexcept { return label == Label::Human ? "human" : "watermarked"; }

Label parse_label(std::string_view name) {
    if (name == "human") return Label::Human;
    if (name == "watermarked") return Label::Watermarked;
    throw Error(Errc::ParseError, "unknown label '" + std::string(name) + "'");
}

std::vector<double> ScoredCorpus::scores(Label label) const {
    std::vector<double> out;
    for (const auto& r : records)
        if (r.label == label) out.push_back(r.z_soft);
    return out;
}

ScoredCorpus scored_corpus_from_jsonl(const std::vector<nlohmann::json>& records) {
    ScoredCorpus corpus;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        try {
            ScoredRecord rec;
            rec.id = r.contains("id") ? (r["id"].is_string() ? r["id"].get<std::string>() : r["id"].dump())
                                      : std::to_string(i);
            rec.label = parse_label(r.at("label").get<std::string>());
            rec.z_soft = r.at("z_soft").get<double>();
            rec.N = r.value("N", std::size_t{0});
            corpus.records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ParseError, fmt::format("score record {}: {}", i, e.what()));
        }
    }
    return corpus;
}

double roc_auc(std::span<const double> human, std::span<const double> watermarked) {
    if (human.empty() || watermarked.empty())
        throw Error(Errc::MissingClass, "ROC-AUC needs human and watermarked scores");
    struct Item {
        double score;
        bool wm;
    };
    std::vector<Item> items;
    items.reserve(human.size() + watermarked.size());
    for (double s : human) items.push_back({s, false});
    for (double s : watermarked) items.push_back({s, true});
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.score < y.score; });

    // Sum of 1-based average ranks of the watermarked scores.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < items.size();) {
        std::size_t j = i;
        std::size_t wm_in_group = 0;
        while (j < items.size() && items[j].score == items[i].score) wm_in_group += items[j++].wm;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        rank_sum += avg_rank * static_cast<double>(wm_in_group);
        i = j;
    }
    const double nw = static_cast<double>(watermarked.size());
    const double nh = static_cast<double>(human.size());
    return (rank_sum - nw * (nw + 1.0) / 2.0) / (nw * nh);
}

double roc_auc(const ScoredCorpus& corpus) {
    return roc_auc(corpus.scores(Label::Human), corpus.scores(Label::Watermarked));
}

double tp_at_fp(std::span<const double> human, std::span<const double> watermarked, double fp_target) {
    if (human.empty() || watermarked.empty())
        throw Error(Errc::MissingClass, "TP@FP needs human and watermarked scores");
    const double beta = sweep_beta(human, fp_target);
    const auto above = std::count_if(watermarked.begin(), watermarked.end(), [beta](double z) { return z > beta; });
    return static_cast<double>(above) / static_cast<double>(watermarked.size());
}

double tp_at_fp(const ScoredCorpus& corpus, double fp_target) {
    return tp_at_fp(corpus.scores(Label::Human), corpus.scores(Label::Watermarked), fp_target);
}

double ent3(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::vector<std::string> tokens;
    std::string tok;
    while (in >> tok) tokens.push_back(std::move(tok));
    if (tokens.size() < 3) throw Error(Errc::TooShort, "trigram entropy needs at least three tokens");

    std::unordered_map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i + 2 < tokens.size(); ++i)
        ++counts[tokens[i] + '\x1f' + tokens[i + 1] + '\x1f' + tokens[i + 2]];
    const double total = static_cast<double>(tokens.size() - 2);
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return std::max(h, 0.0);
}

nlohmann::json to_json(const EvalSummary& s) {
    nlohmann::json tp = nlohmann::json::object();
    for (const auto& [fp, v] : s.tp_at_fp) tp[fmt::format("{}", fp)] = v;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"roc_auc", s.roc_auc},
            {"tp_at_fp", tp},
            {"mean_attempts", opt(s.mean_attempts)},
            {"latency_per_sentence_ms", opt(s.latency_per_sentence_ms)},
            {"ent3_bits", opt(s.ent3_bits)}};
}

EvalSummary summarize(const ScoredCorpus& corpus, std::span<const double> fp_targets) {
    static constexpr double kDefaultTargets[] = {0.01, 0.05};
    if (fp_targets.empty()) fp_targets = kDefaultTargets;
    const auto human = corpus.scores(Label::Human);
    const auto wm = corpus.scores(Label::Watermarked);
    EvalSummary summary;
    summary.roc_auc = roc_auc(human, wm);
    for (double fp : fp_targets) summary.tp_at_fp[fp] = tp_at_fp(human, wm, fp);
    return summary;
}

} // namespace simmark
