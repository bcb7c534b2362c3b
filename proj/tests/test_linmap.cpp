#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "incompat/linmap.hpp"
#include "incompat/oracles.hpp"
#include "incompat/random.hpp"

using namespace incompat;
using doctest::Approx;

namespace {

Mat2d M(double a, double b, double c, double d) {
    Mat2d m;
    m << a, b, c, d;
    return m;
}

// Singular values by hand: orthonormalize with Cholesky factors instead of
// symmetric square roots, then take eigenvalues of X^T X.
Eigen::Vector2d oracle_singular_values(const LinMap2d &A) {
    const Mat2d Lg = A.domain.entries().llt().matrixL(), Lh = A.codomain.entries().llt().matrixL();
    const Mat2d X = Lh.transpose() * A.entries * Lg.transpose().inverse();
    Eigen::SelfAdjointEigenSolver<Mat2d> es(X.transpose() * X);
    return es.eigenvalues().cwiseMax(0).cwiseSqrt().reverse();
}

} // namespace

TEST_CASE("inner products reject non-SPD input") {
    CHECK_THROWS_AS(InnerProduct2d(M(1, 2, 0, 1)), Error);
    CHECK_THROWS_AS(InnerProduct2d(M(-1, 0, 0, 1)), Error);
    CHECK_THROWS_AS(InnerProduct2d(M(1, 2, 2, 1)), Error);
    try {
        InnerProduct2d(M(1, 0, 0, 0));
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::InvalidMetric);
    }
}

TEST_CASE("frobenius norm examples") {
    CHECK(frobenius_norm(LinMap2d(Mat2d::Identity())) == Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(frobenius_norm(LinMap2d(M(3, 0, 0, 4))) == Approx(5.0).epsilon(1e-14));
    const LinMap2d A(Mat2d::Identity(), InnerProduct2d(M(4, 0, 0, 1)), InnerProduct2d());
    CHECK(frobenius_norm(A) == Approx(std::sqrt(1.25)).epsilon(1e-14));
}

TEST_CASE("operator norm examples") {
    CHECK(operator_norm(LinMap2d(Mat2d::Identity())) == Approx(1.0).epsilon(1e-14));
    CHECK(operator_norm(LinMap2d(M(3, 0, 0, 4))) == Approx(4.0).epsilon(1e-14));
}

TEST_CASE("signed svd examples") {
    auto s = signed_svd(LinMap2d(M(2, 0, 0, 1)));
    CHECK(s.sigma(0) == Approx(2.0));
    CHECK(s.sigma(1) == Approx(1.0));
    CHECK((s.rotation() - Mat2d::Identity()).norm() < 1e-14);

    s = signed_svd(LinMap2d(M(1, 0, 0, -1)));
    CHECK(s.sigma(0) == Approx(1.0));
    CHECK(s.sigma(1) == Approx(-1.0));

    const Mat2d R = rotation(0.7);
    s = signed_svd(LinMap2d(R));
    CHECK(s.sigma(0) == Approx(1.0).epsilon(1e-14));
    CHECK(s.sigma(1) == Approx(1.0).epsilon(1e-14));
    CHECK((s.rotation() - R).norm() < 1e-14);
}

TEST_CASE("signed svd has no rotation factor when sigma1 + sigma2 vanishes") {
    const auto s = signed_svd(LinMap2d(M(1, 0, 0, -1)));
    CHECK_FALSE(s.rotation_factor.has_value());
    try {
        (void)s.rotation();
        FAIL("expected DegenerateMap");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DegenerateMap);
    }
}

TEST_CASE("signed singular values agree with a Cholesky-frame eigen oracle") {
    CounterRng rng(101);
    for (int k = 0; k < 500; ++k) {
        const LinMap2d A(random_matrix(rng), random_metric(rng), random_metric(rng));
        const auto s = signed_svd(A).sigma;
        const auto o = oracle_singular_values(A);
        CHECK(s(0) == Approx(o(0)).epsilon(1e-9));
        CHECK(std::abs(s(1)) == Approx(o(1)).epsilon(1e-9).scale(1));
        const double det = A.entries.determinant();
        if (std::abs(s(1)) > 1e-8) CHECK((s(1) > 0) == (det > 0));
    }
}

TEST_CASE("distortion examples") {
    CHECK(distortion(LinMap2d(M(2, 0, 0, 1))) == Approx(1.0));
    CHECK(distortion(LinMap2d(rotation(1.3))) < 1e-15);
    CHECK(distortion(LinMap2d(Mat2d::Zero())) == Approx(std::sqrt(2.0)));
    // A reflection sits at Frobenius distance 2 from SO(2).
    CHECK(distortion(LinMap2d(M(1, 0, 0, -1))) == Approx(2.0));
    CHECK(oracle::sampled_distortion(LinMap2d(M(1, 0, 0, -1)), 720) == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("op_dist_to_SO examples against the sampled oracle") {
    const LinMap2d A(M(2, 0, 0, 1)), B(M(1, 0, 0, -1));
    CHECK(op_dist_to_SO(A) == Approx(1.0));
    CHECK(oracle::sampled_op_dist(A, 720) == Approx(1.0).epsilon(1e-4));
    CHECK(op_dist_to_SO(B) == Approx(2.0));
    CHECK(oracle::sampled_op_dist(B, 720) == Approx(2.0).epsilon(1e-4));
}

TEST_CASE("SO-set Hausdorff oracle examples") {
    const InnerProduct2d e;
    CHECK(so_set_hausdorff_oracle(e, e, LinMap2d(Mat2d::Identity()), 720) < 1e-12);
    CHECK(so_set_hausdorff_oracle(e, e, LinMap2d(M(2, 0, 0, 1)), 2000) == Approx(1.0).epsilon(2e-3));
    CHECK_THROWS_AS(so_set_hausdorff_oracle(e, e, LinMap2d(M(2, 0, 0, 1)), 100), Error);
}

TEST_CASE("sandwich of norms on random metric maps") {
    CounterRng rng(102);
    for (int k = 0; k < 2000; ++k) {
        const LinMap2d A(random_matrix(rng), random_metric(rng), random_metric(rng));
        const double op = operator_norm(A), fr = frobenius_norm(A);
        CHECK(op <= fr * (1 + 1e-12));
        CHECK(fr <= 2 * op * (1 + 1e-12));
        CHECK(op == Approx(oracle::operator_norm(A.entries, A.domain, A.codomain)).epsilon(1e-10));
        CHECK(fr == Approx(oracle::frobenius(A.entries, A.domain, A.codomain)).epsilon(1e-10));
    }
}

TEST_CASE("closest rotation is a special isometry and minimizes the sampled distance") {
    CounterRng rng(103);
    for (int k = 0; k < 200; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d A(random_matrix(rng), g, h);
        const auto s = signed_svd(A);
        if (!s.rotation_factor) continue;
        CHECK(is_special_isometry(s.rotation(), g, h));
        const double at_R = oracle::frobenius<double>(A.entries - s.rotation(), g, h);
        CHECK(at_R == Approx(distortion(A)).epsilon(1e-10));
        CHECK(at_R <= oracle::sampled_distortion(A, 360) + 1e-12);
    }
}

TEST_CASE("distortion is invariant under pre- and post-composition with isometries") {
    CounterRng rng(104);
    for (int k = 0; k < 300; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d A(random_matrix(rng), g, h);
        const Mat2d Q = oracle::sampled_isometry(g, g, rng.uniform(0.0, 6.28));
        const Mat2d P = oracle::sampled_isometry(h, h, rng.uniform(0.0, 6.28));
        CHECK(distortion(LinMap2d(A.entries * Q, g, h)) == Approx(distortion(A)).epsilon(1e-12));
        CHECK(distortion(LinMap2d(P * A.entries, g, h)) == Approx(distortion(A)).epsilon(1e-12));
    }
}

TEST_CASE("shift inequality for compositions") {
    CounterRng rng(105);
    for (int k = 0; k < 500; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d A(random_matrix(rng), h, InnerProduct2d());
        Mat2d L = random_matrix(rng);
        if (L.determinant() < 0) L.row(0) *= -1;
        const auto [lhs, rhs] = so_shift_gap(A, LinMap2d(L, g, h));
        CHECK(lhs <= rhs + 1e-10);
    }
}

TEST_CASE("shift gap matches a sampled distance to the shifted rotation family") {
    // dist(A L, SO(L*h, e)) by brute force over SO(L*h, e).
    CounterRng rng(106);
    for (int k = 0; k < 50; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d A(random_matrix(rng), h, InnerProduct2d());
        Mat2d L = random_matrix(rng);
        if (L.determinant() < 0) L.row(0) *= -1;
        const LinMap2d AL(A.entries * L, h.pullback(L), InnerProduct2d());
        const double sampled = oracle::sampled_distortion(AL, 4000);
        // Frobenius norms in the two routines use different domain metrics (g vs L*h), so
        // compare through the domain-free form of the family distance.
        const Mat2d P = spd_sqrt<double>(h.pullback(L).entries());
        const double family = dist_to_rotation_family<double>(A.entries * L, h.pullback(L), P);
        CHECK(family == Approx(distortion(AL)).epsilon(1e-9).scale(1));
        CHECK(sampled >= distortion(AL) - 1e-12);
    }
}
