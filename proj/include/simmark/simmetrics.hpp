#pragma once

// Similarity measures and the soft count of a similarity against the target interval.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "simmark/error.hpp"

namespace simmark {

enum class SimilarityMeasure { Cosine, Euclidean };

std::string_view to_string(SimilarityMeasure m) noexcept;
/// Accepts "cosine" or "euclidean"; throws InvalidConfig otherwise.
SimilarityMeasure parse_measure(std::string_view name);

/// Closed interval [a, b] with a < b.
struct Interval {
    double a = 0.0;
    double b = 1.0;

    Interval() = default;
    Interval(double lo, double hi) : a(lo), b(hi) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw Error(Errc::InvalidConfig, "interval needs finite bounds with a < b");
    }

    bool contains(double s) const noexcept { return s >= a && s <= b; }
    double width() const noexcept { return b - a; }
    bool operator==(const Interval&) const = default;
};

/// Smoothness of the soft count. Infinity reproduces the hard step count.
struct DecayFactor {
    double K = 250.0;

    DecayFactor() = default;
    explicit DecayFactor(double k) : K(k) {
        if (!(k > 0.0)) throw Error(Errc::InvalidConfig, "decay factor must be positive");
    }
    static DecayFactor hard() { return DecayFactor(std::numeric_limits<double>::infinity()); }
};

template <class DerivedU, class DerivedV>
typename DerivedU::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedU>& u,
                                            const Eigen::MatrixBase<DerivedV>& v) {
    using Scalar = typename DerivedU::Scalar;
    if (u.size() != v.size()) throw Error(Errc::DimensionMismatch, "cosine of vectors with different sizes");
    const Scalar nu = u.norm();
    const Scalar nv = v.norm();
    if (nu == Scalar(0) || nv == Scalar(0)) throw Error(Errc::ZeroVector, "cosine with an all-zero vector");
    const Scalar c = u.dot(v) / (nu * nv);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

template <class DerivedU, class DerivedV>
typename DerivedU::Scalar euclidean_distance(const Eigen::MatrixBase<DerivedU>& u,
                                             const Eigen::MatrixBase<DerivedV>& v) {
    if (u.size() != v.size()) throw Error(Errc::DimensionMismatch, "distance between vectors with different sizes");
    return (u - v).norm();
}

template <class DerivedU, class DerivedV>
typename DerivedU::Scalar similarity(SimilarityMeasure measure, const Eigen::MatrixBase<DerivedU>& u,
                                     const Eigen::MatrixBase<DerivedV>& v) {
    return measure == SimilarityMeasure::Cosine ? cosine_similarity(u, v) : euclidean_distance(u, v);
}

/// 1 inside [a, b]; exp(-K * distance to the nearer bound) outside. Underflows to 0 for
/// hopeless outliers.
template <class Scalar>
Scalar soft_count(Scalar s, const Interval& interval, const DecayFactor& decay) {
    const Scalar a = static_cast<Scalar>(interval.a);
    const Scalar b = static_cast<Scalar>(interval.b);
    if (s >= a && s <= b) return Scalar(1);
    const Scalar distance = std::min(std::abs(a - s), std::abs(b - s));
    return std::exp(-static_cast<Scalar>(decay.K) * distance);
}

template <class Scalar>
Scalar hard_count(Scalar s, const Interval& interval) {
    return interval.contains(static_cast<double>(s)) ? Scalar(1) : Scalar(0);
}

} // namespace simmark
