#include "simmark/projection.hpp"

#include <json.hpp>

#include "simmark/io.hpp"

namespace simmark {

PcaModel pca_fit(std::span<const Embedding> data, Eigen::Index k) {
    if (data.empty()) throw Error(Errc::InsufficientData, "no vectors to fit");
    const Eigen::Index d = data.front().size();
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(data.size()), d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != d) throw Error(Errc::DimensionMismatch, "vectors have different dimensions");
        stacked.row(static_cast<Eigen::Index>(i)) = data[i].transpose();
    }
    return pca_fit(stacked, k);
}

void require_provenance(const PcaModel& model, const EmbedderSpec& spec) {
    if (model.model_id != spec.model_id || model.instruction != spec.instruction)
        throw Error(Errc::ProvenanceMismatch,
                    "PCA model was fitted on '" + model.model_id + "' / '" + model.instruction +
                        "' but the embedder is '" + spec.model_id + "' / '" + spec.instruction + "'");
    if (model.input_dim() != spec.dim)
        throw Error(Errc::ProvenanceMismatch, "PCA input dimension differs from the embedder dimension");
}

void save_pca(const PcaModel& model, const std::string& path) {
    nlohmann::json components = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.components.rows(); ++r) {
        std::vector<double> row(model.components.row(r).begin(), model.components.row(r).end());
        components.push_back(row);
    }
    nlohmann::json doc = {
        {"format", "simmark-pca"},
        {"version", 1},
        {"d", model.input_dim()},
        {"k", model.output_dim()},
        {"mean", std::vector<double>(model.mean.begin(), model.mean.end())},
        {"components", components},
        {"explained_variance",
         std::vector<double>(model.explained_variance.begin(), model.explained_variance.end())},
        {"fit_corpus_id", model.fit_corpus_id},
        {"embedder", {{"model_id", model.model_id}, {"instruction", model.instruction}}},
    };
    io::write_atomic(path, doc.dump() + "\n");
}

PcaModel load_pca(const std::string& path) {
    const auto doc = io::read_json(path);
    try {
        if (doc.at("format") != "simmark-pca") throw Error(Errc::ParseError, path + " is not a PCA model");
        const auto d = doc.at("d").get<Eigen::Index>();
        const auto k = doc.at("k").get<Eigen::Index>();
        PcaModel model;
        const auto mean = doc.at("mean").get<std::vector<double>>();
        const auto& rows = doc.at("components");
        const auto var = doc.at("explained_variance").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(mean.size()) != d || static_cast<Eigen::Index>(rows.size()) != k ||
            static_cast<Eigen::Index>(var.size()) != k)
            throw Error(Errc::ParseError, path + ": inconsistent PCA shapes");
        model.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
        model.explained_variance = Eigen::Map<const Eigen::VectorXd>(var.data(), k);
        model.components.resize(k, d);
        for (Eigen::Index r = 0; r < k; ++r) {
            const auto row = rows.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != d) throw Error(Errc::ParseError, path + ": ragged components");
            model.components.row(r) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), d);
        }
        model.fit_corpus_id = doc.value("fit_corpus_id", "");
        model.model_id = doc.at("embedder").at("model_id").get<std::string>();
        model.instruction = doc.at("embedder").at("instruction").get<std::string>();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::ParseError, path + ": " + e.what());
    }
}

} // namespace simmark
