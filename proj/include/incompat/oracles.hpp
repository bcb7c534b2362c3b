////////////////////////////////////////////////////////////////////////////////
// oracles.hpp
////////////////////////////////////////////////////////////////////////////////
//  Brute-force reference computations for the closed forms in linmap.hpp.
//  These never touch the signed SVD or the symmetric square root: SO(g, h)
//  is parametrized through Cholesky factors, g = Lg Lg^T and h = Lh Lh^T,
//  as  R(b) = Lh^{-T} Rot(b) Lg^T,  and norms come from trace/eigenvalue
//  formulas in the original coordinates.  Angles are sampled uniformly, so
//  the minima carry an O(1/samples) (usually O(1/samples^2)) bias.
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "incompat/linmap.hpp"

namespace incompat::oracle {

template <typename Scalar>
Mat2<Scalar> cholesky_factor(const InnerProduct2<Scalar> &g) {
    return g.entries().llt().matrixL();
}

// Member of SO(g, h) at angle b.
template <typename Scalar>
Mat2<Scalar> sampled_isometry(const InnerProduct2<Scalar> &g, const InnerProduct2<Scalar> &h, Scalar angle) {
    const Mat2<Scalar> Lg = cholesky_factor(g), Lh = cholesky_factor(h);
    return Lh.transpose().inverse() * rotation(angle) * Lg.transpose();
}

// |X|^2 = tr(g^{-1} X^T h X)
template <typename Scalar>
Scalar frobenius(const Mat2<Scalar> &X, const InnerProduct2<Scalar> &g, const InnerProduct2<Scalar> &h) {
    using std::sqrt;
    return sqrt(std::max(Scalar(0), (g.entries().inverse() * X.transpose() * h.entries() * X).trace()));
}

// Largest eigenvalue of g^{-1} X^T h X, from its trace and determinant.
template <typename Scalar>
Scalar operator_norm(const Mat2<Scalar> &X, const InnerProduct2<Scalar> &g, const InnerProduct2<Scalar> &h) {
    using std::sqrt;
    const Mat2<Scalar> M = g.entries().inverse() * X.transpose() * h.entries() * X;
    const Scalar t = M.trace() / 2, d = M.determinant();
    return sqrt(std::max(Scalar(0), t + sqrt(std::max(Scalar(0), t * t - d))));
}

template <typename Scalar>
Scalar sampled_distortion(const LinMap2<Scalar> &A, int samples) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (int k = 0; k < samples; ++k) {
        const Scalar b = Scalar(2) * std::numbers::pi_v<Scalar> * k / samples;
        const Mat2<Scalar> R = sampled_isometry(A.domain, A.codomain, b);
        best = std::min(best, frobenius<Scalar>(A.entries - R, A.domain, A.codomain));
    }
    return best;
}

template <typename Scalar>
Scalar sampled_op_dist(const LinMap2<Scalar> &A, int samples) {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (int k = 0; k < samples; ++k) {
        const Scalar b = Scalar(2) * std::numbers::pi_v<Scalar> * k / samples;
        const Mat2<Scalar> R = sampled_isometry(A.domain, A.codomain, b);
        best = std::min(best, operator_norm<Scalar>(A.entries - R, A.domain, A.codomain));
    }
    return best;
}

// Hausdorff distance, in the operator norm of (V, g) -> (R^2, e), between the
// sampled families SO(g, e) and SO(L^* h, e).  L must preserve orientation.
template <typename Scalar>
Scalar so_set_hausdorff(const InnerProduct2<Scalar> &g, const InnerProduct2<Scalar> &h,
                        const Mat2<Scalar> &L, int samples) {
    if (!(L.determinant() > 0))
        throw Error(ErrorCode::DegenerateMap, "L must be an orientation-preserving isomorphism");
    const InnerProduct2<Scalar> e;
    const InnerProduct2<Scalar> pulled = h.pullback(L);
    std::vector<Mat2<Scalar>> first(samples), second(samples);
    for (int k = 0; k < samples; ++k) {
        const Scalar b = Scalar(2) * std::numbers::pi_v<Scalar> * k / samples;
        first[k] = sampled_isometry(g, e, b);
        second[k] = sampled_isometry(pulled, e, b);
    }
    // Operator norm relative to g only needs g^{-1}; precompute once.
    const Mat2<Scalar> ginv = g.entries().inverse();
    auto opnorm = [&](const Mat2<Scalar> &X) {
        using std::sqrt;
        const Mat2<Scalar> M = ginv * X.transpose() * X;
        const Scalar t = M.trace() / 2, d = M.determinant();
        return sqrt(std::max(Scalar(0), t + sqrt(std::max(Scalar(0), t * t - d))));
    };
    auto directed = [&](const std::vector<Mat2<Scalar>> &from, const std::vector<Mat2<Scalar>> &to) {
        Scalar worst = 0;
        for (const auto &X : from) {
            Scalar best = std::numeric_limits<Scalar>::infinity();
            for (const auto &Y : to) best = std::min(best, opnorm(X - Y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(first, second), directed(second, first));
}

} // namespace incompat::oracle

namespace incompat {

// Left side of the SO-set identity, dist^inf(SO(g, e), SO(L^* h, e)), by sampling.
// Converges to op_dist_to_SO(LinMap2(L, g, h)) as samples grows.
template <typename Scalar>
Scalar so_set_hausdorff_oracle(const InnerProduct2<Scalar> &g, const InnerProduct2<Scalar> &h,
                               const LinMap2<Scalar> &L, int samples) {
    if (samples < 360) throw Error(ErrorCode::BadParams, "so_set_hausdorff_oracle needs samples >= 360");
    return oracle::so_set_hausdorff<Scalar>(g, h, L.entries, samples);
}

} // namespace incompat
