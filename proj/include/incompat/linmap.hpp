////////////////////////////////////////////////////////////////////////////////
// linmap.hpp
////////////////////////////////////////////////////////////////////////////////
//  Linear maps between oriented inner-product planes (V, g) -> (W, h).
//
//  Every quantity is evaluated in metric-orthonormal frames: a map A is
//  represented there by  Ahat = h^{1/2} A g^{-1/2},  and SO(g, h) becomes
//  SO(2).  The 2x2 signed SVD is closed form, so nothing here iterates.
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "incompat/error.hpp"

namespace incompat {

template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Mat2d = Mat2<double>;
using Vec2d = Vec2<double>;

// Closest rotation is declared non-unique below this value of sigma_1 + sigma_2.
inline constexpr double kDegenerateThreshold = 1e-14;

template <typename Scalar>
Mat2<Scalar> rotation(Scalar angle) {
    using std::cos; using std::sin;
    Mat2<Scalar> R;
    R << cos(angle), -sin(angle),
         sin(angle),  cos(angle);
    return R;
}

// Symmetric square root of a 2x2 SPD matrix:  sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det)).
template <typename Scalar>
Mat2<Scalar> spd_sqrt(const Mat2<Scalar> &M) {
    using std::sqrt;
    const Scalar s = sqrt(M.determinant());
    const Scalar t = sqrt(M.trace() + Scalar(2) * s);
    return (M + s * Mat2<Scalar>::Identity()) / t;
}

template <typename Scalar>
Mat2<Scalar> spd_inv_sqrt(const Mat2<Scalar> &M) {
    return spd_sqrt(M).inverse();
}

////////////////////////////////////////////////////////////////////////////////
// Metrics
////////////////////////////////////////////////////////////////////////////////
template <typename Scalar>
class InnerProduct2 {
public:
    InnerProduct2() : m_entries(Mat2<Scalar>::Identity()) {}

    explicit InnerProduct2(const Mat2<Scalar> &entries) : m_entries(entries) {
        if (!(entries(0, 1) == entries(1, 0)))
            throw Error(ErrorCode::InvalidMetric, "metric is not symmetric");
        if (!(entries(0, 0) > 0) || !(entries.determinant() > 0))
            throw Error(ErrorCode::InvalidMetric, "metric is not positive definite");
    }

    static InnerProduct2 euclidean() { return InnerProduct2(); }

    const Mat2<Scalar> &entries() const { return m_entries; }
    Mat2<Scalar> sqrt() const { return spd_sqrt(m_entries); }
    Mat2<Scalar> inv_sqrt() const { return spd_inv_sqrt(m_entries); }

    bool is_euclidean() const { return m_entries == Mat2<Scalar>::Identity(); }

    // Pullback L^* h of this metric along L : V -> W  (Gram matrix L^T h L).
    InnerProduct2 pullback(const Mat2<Scalar> &L) const {
        Mat2<Scalar> P = L.transpose() * m_entries * L;
        P(1, 0) = P(0, 1);
        return InnerProduct2(P);
    }

private:
    Mat2<Scalar> m_entries;
};

using InnerProduct2d = InnerProduct2<double>;

////////////////////////////////////////////////////////////////////////////////
// Linear maps
////////////////////////////////////////////////////////////////////////////////
template <typename Scalar>
struct LinMap2 {
    Mat2<Scalar> entries = Mat2<Scalar>::Zero();
    InnerProduct2<Scalar> domain;   // g on V
    InnerProduct2<Scalar> codomain; // h on W

    LinMap2() = default;
    explicit LinMap2(const Mat2<Scalar> &A) : entries(A) {}
    LinMap2(const Mat2<Scalar> &A, const InnerProduct2<Scalar> &g, const InnerProduct2<Scalar> &h)
        : entries(A), domain(g), codomain(h) {}

    // Matrix of the map between g- and h-orthonormal frames.
    Mat2<Scalar> orthonormal() const {
        if (domain.is_euclidean() && codomain.is_euclidean()) return entries;
        return codomain.sqrt() * entries * domain.inv_sqrt();
    }

    // Map an orthonormal-frame matrix back to the coordinates of this map.
    Mat2<Scalar> from_orthonormal(const Mat2<Scalar> &M) const {
        if (domain.is_euclidean() && codomain.is_euclidean()) return M;
        return codomain.inv_sqrt() * M * domain.sqrt();
    }
};

using LinMap2d = LinMap2<double>;

// (A o L) : (V, g) -> (X, k)  for  L : (V, g) -> (W, h),  A : (W, h) -> (X, k).
template <typename Scalar>
LinMap2<Scalar> compose(const LinMap2<Scalar> &A, const LinMap2<Scalar> &L) {
    return LinMap2<Scalar>(A.entries * L.entries, L.domain, A.codomain);
}

////////////////////////////////////////////////////////////////////////////////
// Signed singular values
////////////////////////////////////////////////////////////////////////////////
template <typename Scalar>
struct SignedSpectrum {
    Vec2<Scalar> sigma = Vec2<Scalar>::Zero(); // sigma(0) >= |sigma(1)|, sign(sigma(1)) = sign(det)
    std::optional<Mat2<Scalar>> rotation_factor;

    const Mat2<Scalar> &rotation() const {
        if (!rotation_factor)
            throw Error(ErrorCode::DegenerateMap, "closest rotation is not unique (sigma_1 + sigma_2 ~ 0)");
        return *rotation_factor;
    }
};

namespace detail {

// Signed SVD of a plain 2x2 matrix:  M = Rot(phi) diag(s1, s2) Rot(theta).
// Returns (s1, s2) and the closest rotation Rot(phi + theta) when it is unique.
template <typename Scalar>
SignedSpectrum<Scalar> signed_svd_raw(const Mat2<Scalar> &M) {
    using std::hypot;
    const Scalar E = (M(0, 0) + M(1, 1)) / 2, F = (M(0, 0) - M(1, 1)) / 2;
    const Scalar G = (M(1, 0) + M(0, 1)) / 2, H = (M(1, 0) - M(0, 1)) / 2;
    const Scalar Q = hypot(E, H), R = hypot(F, G);
    SignedSpectrum<Scalar> out;
    out.sigma << Q + R, Q - R;
    if (Scalar(2) * Q > Scalar(kDegenerateThreshold)) {
        Mat2<Scalar> rot;
        rot << E / Q, -H / Q,
               H / Q,  E / Q;
        out.rotation_factor = rot;
    }
    return out;
}

} // namespace detail

template <typename Scalar>
SignedSpectrum<Scalar> signed_svd(const LinMap2<Scalar> &A) {
    auto out = detail::signed_svd_raw<Scalar>(A.orthonormal());
    if (out.rotation_factor) out.rotation_factor = A.from_orthonormal(*out.rotation_factor);
    return out;
}

template <typename Scalar>
Scalar frobenius_norm(const LinMap2<Scalar> &A) {
    return A.orthonormal().norm();
}

template <typename Scalar>
Scalar operator_norm(const LinMap2<Scalar> &A) {
    return detail::signed_svd_raw<Scalar>(A.orthonormal()).sigma(0);
}

// Frobenius distance to SO(g, h):  sqrt((s1 - 1)^2 + (s2 - 1)^2)  with signed s2.
template <typename Scalar>
Scalar distortion(const LinMap2<Scalar> &A) {
    const Vec2<Scalar> s = detail::signed_svd_raw<Scalar>(A.orthonormal()).sigma;
    return (s - Vec2<Scalar>::Ones()).norm();
}

// Operator-norm distance to SO(g, h).
template <typename Scalar>
Scalar op_dist_to_SO(const LinMap2<Scalar> &A) {
    using std::abs;
    const Vec2<Scalar> s = detail::signed_svd_raw<Scalar>(A.orthonormal()).sigma;
    return std::max(abs(s(0) - Scalar(1)), abs(s(1) - Scalar(1)));
}

template <typename Scalar>
bool is_special_isometry(const Mat2<Scalar> &R, const InnerProduct2<Scalar> &g,
                         const InnerProduct2<Scalar> &h, double tol = 1e-10) {
    const Mat2<Scalar> gram = R.transpose() * h.entries() * R;
    return (gram - g.entries()).norm() <= tol * std::max(Scalar(1), g.entries().norm()) && R.determinant() > 0;
}

// Frobenius distance, measured with domain metric g, from X : V -> R^2 to the
// rotation family { Rot(b) P : b in [0, 2 pi) }.  With P = (L^T h L)^{1/2} this
// family is SO(L^* h, e).  Closed form: the best rotation maximizes tr(Rot(b) P g^{-1} X^T).
template <typename Scalar>
Scalar dist_to_rotation_family(const Mat2<Scalar> &X, const InnerProduct2<Scalar> &g, const Mat2<Scalar> &P) {
    using std::sqrt; using std::hypot;
    const Mat2<Scalar> gis = g.inv_sqrt();
    const Mat2<Scalar> M = P * g.entries().inverse() * X.transpose();
    const Scalar best = hypot(M(0, 0) + M(1, 1), M(0, 1) - M(1, 0));
    const Scalar d2 = (X * gis).squaredNorm() + (P * gis).squaredNorm() - Scalar(2) * best;
    return sqrt(std::max(d2, Scalar(0)));
}

// The two sides of the SO-shift inequality for A : (W, h) -> (R^2, e) and L : (V, g) -> (W, h):
//   lhs = | dist(A o L, SO(L^* h, e)) - dist(A, SO(h, e)) |,   rhs = (|A|_2 + 2) Dis L.
template <typename Scalar>
std::pair<Scalar, Scalar> so_shift_gap(const LinMap2<Scalar> &A, const LinMap2<Scalar> &L) {
    using std::abs;
    const Mat2<Scalar> P = spd_sqrt<Scalar>(L.codomain.pullback(L.entries).entries());
    const Scalar shifted = dist_to_rotation_family<Scalar>(A.entries * L.entries, L.domain, P);
    const Scalar lhs = abs(shifted - distortion(A));
    const Scalar rhs = (frobenius_norm(A) + Scalar(2)) * distortion(L);
    return {lhs, rhs};
}

} // namespace incompat
