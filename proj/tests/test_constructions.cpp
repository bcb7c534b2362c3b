#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "incompat/body.hpp"
#include "incompat/constructions.hpp"

using namespace incompat;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

ErrorCode code_of(auto &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::IoError;
}

double deficit_sum(const BodyMesh &m) {
    double sum = 0;
    for (int v = 0; v < m.vertex_count(); ++v)
        if (!m.is_boundary_vertex(v)) sum += kTwoPi - cone_angle(m, v);
    return sum;
}

// Simpson with many panels, used as an independent check of the edge-length quadrature.
double fine_length(const ConformalFactor &phi, Vec2d a, Vec2d b) {
    const int n = 20000;
    double s = 0;
    for (int k = 0; k <= n; ++k) {
        const Vec2d x = a + (b - a) * (double(k) / n);
        const double w = k == 0 || k == n ? 1 : k % 2 ? 4 : 2;
        s += w * std::exp(phi(x.x(), x.y()));
    }
    return s * (b - a).norm() / (3.0 * n);
}

} // namespace

TEST_CASE("flat_square examples") {
    const auto m1 = flat_square(1, 1.0);
    CHECK(m1.vertex_count() == 4);
    CHECK(m1.triangle_count() == 2);
    CHECK(m1.total_area() == Approx(1.0).epsilon(1e-15));

    const auto m4 = flat_square(4, 1.0);
    CHECK(m4.vertex_count() == 25);
    CHECK(m4.triangle_count() == 32);
    CHECK(max_cone_defect(flat_square(8, 1.0)) < 1e-12);
}

TEST_CASE("cone_mesh parameters and tip angle") {
    CHECK(code_of([] { cone_mesh(0.0, 1.0, 16); }) == ErrorCode::BadParams);
    CHECK(code_of([] { cone_mesh(-0.5, 1.0, 16); }) == ErrorCode::BadParams);
    CHECK(code_of([] { cone_mesh(1.0 + 1e-13, 1.0, 16); }) == ErrorCode::BadParams);
    CHECK(code_of([] { cone_mesh(0.8, 1.0, 4); }) == ErrorCode::BadParams);
    const auto c = cone_mesh(0.8, 1.0, 64);
    CHECK(std::abs(cone_angle(c, 0) - 1.6 * kPi) < 2e-2);
    // Every vertex other than the tip is flat.
    for (int v = 1; v < c.vertex_count(); ++v)
        if (!c.is_boundary_vertex(v)) CHECK(std::abs(cone_angle(c, v) - kTwoPi) < 1e-9);
}

TEST_CASE("identity from a cone to the flat disc distorts by |1/alpha - 1| away from the tip") {
    const double alpha = 0.8;
    const auto cone = cone_mesh(alpha, 1.0, 64), disc = disc_mesh(1.0, 64);
    REQUIRE(cone.same_connectivity(disc));
    const Configuration layout = develop(disc);
    for (int t = 0; t < cone.triangle_count(); ++t) {
        const auto &tri = cone.triangle(t);
        if (tri[0] == 0 || tri[1] == 0 || tri[2] == 0) continue;
        CHECK(std::abs(distortion(deformation_gradient(cone, layout, t)) - (1 / alpha - 1)) < 5e-2);
    }
}

TEST_CASE("dislocation block cone angles and holonomy") {
    for (double theta : {0.3, 0.1, 0.6})
        for (double d : {0.05, 0.2}) {
            const auto B = dislocation_block({theta, d, 1.0}, 2);
            CHECK(cone_angle(B.mesh, B.p_minus) == Approx(kTwoPi + 2 * theta).epsilon(1e-12));
            CHECK(cone_angle(B.mesh, B.p_plus) == Approx(kTwoPi - 2 * theta).epsilon(1e-12));
            int singular = 0;
            for (int v = 0; v < B.mesh.vertex_count(); ++v)
                if (!B.mesh.is_boundary_vertex(v) && std::abs(cone_angle(B.mesh, v) - kTwoPi) > 1e-10) ++singular;
            CHECK(singular == 2);
            CHECK(std::abs(deficit_sum(B.mesh)) < 1e-10);

            const auto h = holonomy(B.mesh, B.dipole_loop);
            CHECK(std::abs(h.rotation_angle) < 1e-10);
            CHECK(std::abs(h.translation.norm() - 2 * d * std::sin(theta)) < 1e-10);

            const auto hp = holonomy(B.mesh, vertex_loop(B.mesh, B.p_plus));
            CHECK(std::abs(hp.rotation_angle - 2 * theta) < 1e-10);
            const auto hm = holonomy(B.mesh, vertex_loop(B.mesh, B.p_minus));
            CHECK(std::abs(hm.rotation_angle + 2 * theta) < 1e-10);
        }
}

TEST_CASE("dislocation block parameter validation") {
    CHECK(code_of([] { dislocation_block({0.5, 1.1, 1.0}); }) == ErrorCode::BadParams); // 2 d sin(theta) >= size
    CHECK(code_of([] { dislocation_block({0.0, 0.1, 1.0}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { dislocation_block({kPi / 2, 0.1, 1.0}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { dislocation_block({0.3, -0.1, 1.0}); }) == ErrorCode::BadParams);
    CHECK(code_of([] { dislocation_block({0.3, 0.1, 1.0}, 0); }) == ErrorCode::BadParams);
    CHECK(code_of([] { dislocation_block({std::nan(""), 0.1, 1.0}); }) == ErrorCode::BadParams);
}

TEST_CASE("flat loops have trivial holonomy") {
    const auto m = flat_square(6, 1.0);
    const GridTopology grid{6, 6};
    const auto h = holonomy(m, grid_ring_loop(grid, 1, 1, 4, 3));
    CHECK(std::abs(h.rotation_angle) < 1e-12);
    CHECK(h.translation.norm() < 1e-12);
    const auto hv = holonomy(m, vertex_loop(m, grid.vertex(3, 3)));
    CHECK(std::abs(hv.rotation_angle) < 1e-12);
    CHECK(hv.translation.norm() < 1e-12);
}

TEST_CASE("holonomy error cases") {
    const auto m = flat_square(3, 1.0);
    CHECK(code_of([&] { holonomy(m, std::vector<int>{}); }) == ErrorCode::NotAStrip);
    CHECK(code_of([&] { holonomy(m, std::vector<int>{0, 5}); }) == ErrorCode::NotAStrip);
    CHECK(code_of([&] { holonomy(m, std::vector<int>{0, 99}); }) == ErrorCode::NotAStrip);
    CHECK(code_of([&] { holonomy(m, std::vector<int>{0}); }) == ErrorCode::NotClosed);
    CHECK(code_of([&] { holonomy(m, std::vector<int>{0, 3, 2}); }) == ErrorCode::NotClosed);
    CHECK(code_of([&] { vertex_loop(m, 0); }) == ErrorCode::BoundaryVertex);
}

TEST_CASE("lattice regimes and Burgers content") {
    const double theta0 = 0.3, b0 = 2 * std::sin(theta0);
    const auto one = dislocation_lattice(1, LatticeRegime::Mean, theta0, 0.6);
    const auto h1 = holonomy(one.mesh, one.block_loop(0, 0));
    CHECK(h1.translation.norm() == Approx(2 * one.d * std::sin(theta0)).epsilon(1e-12));
    CHECK(h1.translation.norm() == Approx(b0).epsilon(1e-12));

    for (auto mode : {LatticeRegime::Mean, LatticeRegime::Uniform})
        for (int n : {2, 3, 4}) {
            const auto L = dislocation_lattice(n, mode, theta0, 0.6);
            const double theta = mode == LatticeRegime::Mean ? theta0 : theta0 * std::pow(n, -0.6);
            CHECK(L.theta == Approx(theta).epsilon(1e-14));
            CHECK(2 * L.d * std::sin(L.theta) == Approx(b0 / (n * n)).epsilon(1e-12));
            CHECK(L.mesh.same_connectivity(L.limit));
            CHECK(max_cone_defect(L.limit) < 1e-10);
            CHECK(L.limit.total_area() == Approx(1.0).epsilon(1e-12));
            double sum = 0;
            for (int c = 0; c < n; ++c)
                for (int r = 0; r < n; ++r) sum += holonomy(L.mesh, L.block_loop(c, r)).translation.norm();
            CHECK(std::abs(sum - b0) < 1e-9);
            // The limit layout is an isometric embedding.
            for (int t = 0; t < L.limit.triangle_count(); ++t)
                CHECK(distortion(deformation_gradient(L.limit, L.limit_layout, t)) < 1e-10);
        }
    CHECK(code_of([] { dislocation_lattice(0, LatticeRegime::Mean, 0.3, 0.6); }) == ErrorCode::BadParams);
    CHECK(code_of([] { dislocation_lattice(2, LatticeRegime::Mean, 1.0, 0.6); }) == ErrorCode::BadParams);
    CHECK(code_of([] { dislocation_lattice(2, LatticeRegime::Uniform, 0.3, 1.0); }) == ErrorCode::BadParams);
}

TEST_CASE("lattice convergence trends") {
    std::vector<MorphismStats> uni, mean;
    for (int n : {2, 4, 8}) {
        const auto U = dislocation_lattice(n, LatticeRegime::Uniform, 0.3, 0.6);
        const auto M = dislocation_lattice(n, LatticeRegime::Mean, 0.3, 0.6);
        uni.push_back(morphism_stats(U.mesh, U.limit));
        mean.push_back(morphism_stats(M.mesh, M.limit));
    }
    for (int k = 1; k < 3; ++k) {
        CHECK(uni[k].sup_dis < uni[k - 1].sup_dis);
        CHECK(mean[k].mean_dis < mean[k - 1].mean_dis);
        CHECK(mean[k].sup_dis > 0.5 * mean[0].sup_dis);
    }
}

TEST_CASE("euclidean triangulation examples") {
    const auto zero = euclidean_triangulation([](double, double) { return 0.0; }, 6);
    const auto flat = flat_square(6, 1.0);
    REQUIRE(zero.same_connectivity(flat));
    for (int t = 0; t < flat.triangle_count(); ++t)
        for (int e = 0; e < 3; ++e) CHECK(std::abs(zero.lengths(t)[e] - flat.lengths(t)[e]) < 1e-12);

    const auto twice = euclidean_triangulation([](double, double) { return std::log(2.0); }, 6);
    for (int t = 0; t < flat.triangle_count(); ++t)
        for (int e = 0; e < 3; ++e) CHECK(twice.lengths(t)[e] == Approx(2 * flat.lengths(t)[e]).epsilon(1e-14));

    const ConformalFactor phi = spherical_cap_factor;
    for (auto [a, b] : {std::pair{Vec2d(0, 0), Vec2d(1, 1)}, {Vec2d(0.25, 0.5), Vec2d(0.375, 0.5)}})
        CHECK(conformal_length(phi, a, b) == Approx(fine_length(phi, a, b)).epsilon(1e-10));
}

TEST_CASE("spherical cap approximations converge") {
    std::vector<double> defect;
    std::vector<double> sup;
    for (int n : {8, 16, 32}) {
        defect.push_back(max_cone_defect(euclidean_triangulation(spherical_cap_factor, n)));
        sup.push_back(morphism_stats(euclidean_triangulation_refined(spherical_cap_factor, n, 2 * n),
                                     euclidean_triangulation(spherical_cap_factor, 2 * n))
                          .sup_dis);
    }
    for (int k = 1; k < 3; ++k) {
        CHECK(defect[k - 1] / defect[k] >= 2);
        CHECK(sup[k] < sup[k - 1]);
    }
}

TEST_CASE("refined triangulation is the same piecewise-flat surface") {
    const auto coarse = euclidean_triangulation(spherical_cap_factor, 4);
    const auto fine = euclidean_triangulation_refined(spherical_cap_factor, 4, 16);
    CHECK(fine.total_area() == Approx(coarse.total_area()).epsilon(1e-12));
    // New vertices lie inside flat triangles or on their edges.
    const GridTopology grid{16, 16};
    for (int j = 1; j < 16; ++j)
        for (int i = 1; i < 16; ++i)
            if (i % 4 || j % 4) CHECK(std::abs(cone_angle(fine, grid.vertex(i, j)) - kTwoPi) < 1e-10);
    CHECK(code_of([] { euclidean_triangulation_refined(spherical_cap_factor, 4, 12); }) == ErrorCode::BadParams);
}
