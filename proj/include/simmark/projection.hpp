#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "simmark/embedding.hpp"
#include "simmark/error.hpp"

namespace simmark {

/// Linear projection onto the top-k principal axes of a fitted corpus.
template <class Scalar>
struct BasicPcaModel {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector mean;
    /// k x d, rows are orthonormal axes ordered by decreasing explained variance.
    Matrix components;
    Vector explained_variance;
    std::string fit_corpus_id;
    /// Embedder provenance; transforms are only valid for vectors from the same model and instruction.
    std::string model_id;
    std::string instruction;

    Eigen::Index input_dim() const noexcept { return components.cols(); }
    Eigen::Index output_dim() const noexcept { return components.rows(); }
};

using PcaModel = BasicPcaModel<double>;

/// Fits by thin SVD of the centered data. Rows of `data` are observations.
/// Each component is flipped so its largest-magnitude entry is positive; near
/// ties (relative 1e-9) go to the lowest index so rounding cannot pick the sign.
template <class Derived>
BasicPcaModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& data, Eigen::Index k) {
    using Scalar = typename Derived::Scalar;
    using Model = BasicPcaModel<Scalar>;
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (k < 1 || d <= k) throw Error(Errc::DimensionMismatch, "need 1 <= k < input dimension");
    if (n <= k) throw Error(Errc::InsufficientData, "need more observations than components");

    Model model;
    model.mean = data.colwise().mean().transpose();
    const typename Model::Matrix centered = data.rowwise() - model.mean.transpose();
    Eigen::BDCSVD<typename Model::Matrix> svd(centered, Eigen::ComputeThinV);
    model.components = svd.matrixV().leftCols(k).transpose();
    model.explained_variance = svd.singularValues().head(k).array().square() / static_cast<Scalar>(n - 1);

    for (Eigen::Index r = 0; r < k; ++r) {
        const Scalar top = model.components.row(r).cwiseAbs().maxCoeff();
        Eigen::Index arg = 0;
        while (std::abs(model.components(r, arg)) < top * Scalar(1 - 1e-9)) ++arg;
        if (model.components(r, arg) < Scalar(0)) model.components.row(r) *= Scalar(-1);
    }
    return model;
}

/// Stacks equal-length embeddings and fits. Throws DimensionMismatch on ragged input.
PcaModel pca_fit(std::span<const Embedding> data, Eigen::Index k);

/// components * (v - mean)
template <class Scalar, class Derived>
typename BasicPcaModel<Scalar>::Vector pca_transform(const BasicPcaModel<Scalar>& model,
                                                     const Eigen::MatrixBase<Derived>& v) {
    if (v.size() != model.input_dim())
        throw Error(Errc::DimensionMismatch, "vector does not match the PCA input dimension");
    return model.components * (v - model.mean);
}

/// Mean squared norm of (x - mean) minus its projection, over the rows of `data`.
template <class Scalar, class Derived>
Scalar reconstruction_error(const BasicPcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& data) {
    const typename BasicPcaModel<Scalar>::Matrix centered = data.rowwise() - model.mean.transpose();
    const typename BasicPcaModel<Scalar>::Matrix projected = centered * model.components.transpose();
    const typename BasicPcaModel<Scalar>::Matrix back = projected * model.components;
    return (centered - back).squaredNorm() / static_cast<Scalar>(data.rows());
}

/// Throws ProvenanceMismatch unless the model was fitted on vectors from `spec`'s model and instruction.
void require_provenance(const PcaModel& model, const EmbedderSpec& spec);

void save_pca(const PcaModel& model, const std::string& path);
PcaModel load_pca(const std::string& path);

} // namespace simmark
