#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "incompat/constructions.hpp"
#include "incompat/energy.hpp"
#include "incompat/parallel.hpp"
#include "incompat/random.hpp"
#include "incompat/solve.hpp"

using namespace incompat;
using doctest::Approx;

namespace {

ErrorCode code_of(auto &&fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::IoError;
}

Configuration jittered_layout(int n, std::uint64_t seed, double amplitude) {
    CounterRng rng(seed);
    Points P = flat_square_layout(n, 1.0).positions();
    for (int v = 0; v < P.rows(); ++v)
        P.row(v) += amplitude / n * Eigen::RowVector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return Configuration(P);
}

double signed_area(const Configuration &u, const Triangle &t) {
    const Vec2d a = u.position(t[1]) - u.position(t[0]), b = u.position(t[2]) - u.position(t[0]);
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

} // namespace

TEST_CASE("options validation") {
    CHECK(code_of([] { SolveOptions o; o.max_iters = 0; o.validate(); }) == ErrorCode::BadParams);
    CHECK(code_of([] { SolveOptions o; o.armijo_c = 1; o.validate(); }) == ErrorCode::BadParams);
    CHECK(code_of([] { SolveOptions o; o.backtrack = 0; o.validate(); }) == ErrorCode::BadParams);
    CHECK(code_of([] { SolveOptions o; o.grad_tol = -1; o.validate(); }) == ErrorCode::BadParams);
    const auto m = flat_square(2, 1.0);
    CHECK(code_of([&] { minimize(m, flat_square_layout(2, 1.0), EnergySettings{1.5}, SolveOptions{}); }) ==
          ErrorCode::NonDifferentiable);
}

TEST_CASE("flat square minimizes to an isometric layout") {
    const auto m = flat_square(4, 1.0);
    const auto r = minimize(m, jittered_layout(4, 7, 0.01), EnergySettings{}, SolveOptions{});
    CHECK(r.stop == StopReason::GradTol);
    CHECK(r.report.total <= 1e-10);
    for (int t = 0; t < m.triangle_count(); ++t) CHECK(distortion(deformation_gradient(m, r.u, t)) < 1e-5);
    // Pairwise vertex distances are those of the reference layout.
    const auto ref = flat_square_layout(4, 1.0);
    for (int a = 0; a < m.vertex_count(); a += 3)
        for (int b = 0; b < m.vertex_count(); b += 5)
            CHECK(std::abs((r.u.position(a) - r.u.position(b)).norm() - (ref.position(a) - ref.position(b)).norm()) < 1e-5);
}

TEST_CASE("cone minimum is strictly positive and the log is monotone") {
    const auto m = cone_mesh(0.8, 1.0, 32);
    SolveOptions o;
    const auto r = minimize(m, initial_configuration(m, 1), EnergySettings{}, o);
    CHECK(r.report.total > 1e-4);
    CHECK(r.report.total < r.initial_energy);
    double prev = r.initial_energy;
    for (const auto &rec : r.log) {
        CHECK(rec.energy <= prev - o.armijo_c * rec.step * rec.slope);
        CHECK(rec.slope > 0);
        prev = rec.energy;
    }
    CHECK(centroid(m, r.u).norm() < 1e-12);
    CHECK(int(r.log.size()) == r.iterations);
}

TEST_CASE("max_iters stops the solver") {
    const auto m = cone_mesh(0.8, 1.0, 16);
    SolveOptions o;
    o.max_iters = 3;
    const auto r = minimize(m, initial_configuration(m, 2), EnergySettings{}, o);
    CHECK(r.stop == StopReason::MaxIters);
    CHECK(r.iterations == 3);
}

TEST_CASE("plain preconditioned descent also converges") {
    const auto m = flat_square(3, 1.0);
    SolveOptions o;
    o.memory = 0;
    const auto r = minimize(m, jittered_layout(3, 3, 0.02), EnergySettings{}, o);
    CHECK(r.report.total <= 1e-10);
}

TEST_CASE("centroid and mean_zero") {
    // Centroid of the image is the area-weighted mean over triangles of vertex averages.
    const auto m = flat_square(2, 2.0);
    Points P = flat_square_layout(2, 2.0).positions();
    P.rowwise() += Eigen::RowVector2d(3, -1);
    const Configuration u(P);
    CHECK((centroid(m, u) - Vec2d(4, 0)).norm() < 1e-14);
    CHECK(centroid(m, mean_zero(m, u)).norm() < 1e-14);
}

TEST_CASE("initial configuration") {
    const auto m = flat_square(2, 1.0);
    const auto u = initial_configuration(m, 9);
    for (const auto &t : m.triangles()) CHECK(signed_area(u, t) > 0);
    CHECK(u.positions() == initial_configuration(m, 9).positions());
    CHECK(u.positions() != initial_configuration(m, 10).positions());

    const auto B = dislocation_block({0.3, 0.05, 1.0}, 2).mesh;
    const auto ub = initial_configuration(B, 1);
    CHECK(std::isfinite(total_energy(B, ub, EnergySettings{}).total));
    for (const auto &t : B.triangles()) CHECK(signed_area(ub, t) > 0);

    // Closed surface: a tetrahedron.
    const BodyMesh tet(4, {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}}, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
    CHECK(code_of([&] { initial_configuration(tet, 1); }) == ErrorCode::ClosedSurface);
}

TEST_CASE("aligned lp distance removes rigid motions") {
    const auto m = flat_square(4, 1.0);
    const auto u = flat_square_layout(4, 1.0);
    const Points moved = u.positions() * rotation(0.9).transpose() + Points::Constant(u.vertex_count(), 2, 5.0);
    CHECK(aligned_lp_distance(m, Configuration(moved), u, 2) < 1e-12);
    // A uniform offset of one coordinate by c on half the vertices is not a rigid motion.
    Points bent = u.positions();
    for (int v = 0; v < bent.rows(); ++v)
        if (bent(v, 0) > 0.5) bent(v, 1) += 0.1;
    CHECK(aligned_lp_distance(m, Configuration(bent), u, 2) > 1e-3);
}

TEST_CASE("gamma experiment rows and determinism") {
    SolveOptions o;
    o.seed = 5;
    const auto gen = lattice_sequence(LatticeRegime::Uniform, 0.3, 0.6);
    const auto a = gamma_experiment(gen, {1, 2, 4}, EnergySettings{}, o);
    REQUIRE(a.rows.size() == 3);
    for (size_t k = 0; k < 3; ++k) {
        CHECK(a.rows[k].n == (1 << k));
        CHECK(a.rows[k].stop == StopReason::GradTol);
        CHECK(a.rows[k].min_energy <= a.rows[k].recovery_energy + 1e-12);
        CHECK(a.rows[k].limit_energy < 1e-12);
    }
    CHECK(a.rows[2].min_energy < a.rows[1].min_energy);

    const int saved = thread_count();
    set_thread_count(3);
    const auto b = gamma_experiment(gen, {1, 2, 4}, EnergySettings{}, o);
    set_thread_count(saved);
    std::ostringstream sa, sb;
    write_results(sa, a);
    write_results(sb, b);
    CHECK(sa.str() == sb.str());

    CHECK(code_of([&] { gamma_experiment(gen, {}, EnergySettings{}, o); }) == ErrorCode::EmptySequence);
    CHECK(code_of([&] { gamma_experiment(gen, {4, 2}, EnergySettings{}, o); }) == ErrorCode::BadParams);
}

TEST_CASE("cold start gives the same minima up to solver tolerance") {
    SolveOptions o;
    const auto gen = lattice_sequence(LatticeRegime::Uniform, 0.3, 0.6);
    const auto warm = gamma_experiment(gen, {2, 4}, EnergySettings{}, o);
    const auto cold = gamma_experiment(gen, {2, 4}, EnergySettings{}, o, ExperimentOptions{false});
    for (size_t k = 0; k < 2; ++k) CHECK(cold.rows[k].min_energy == Approx(warm.rows[k].min_energy).epsilon(1e-3));
}

TEST_CASE("results csv") {
    std::ostringstream empty;
    write_results(empty, SequenceResult{});
    CHECK(empty.str() == std::string(kResultsHeader) + "\n");

    SequenceResult r;
    SequenceRow row;
    row.n = 3;
    row.min_energy = 0.1;
    row.stats.bilip = 1.0 / 3;
    r.rows.push_back(row);
    std::ostringstream one;
    write_results(one, r);
    CHECK(one.str() == std::string(kResultsHeader) + "\n3,0.10000000000000001,0,0,0,0,0.33333333333333331,0,0,0\n");

    std::istringstream back(one.str());
    const auto parsed = read_results(back);
    REQUIRE(parsed.rows.size() == 1);
    CHECK(parsed.rows[0].stats.bilip == 1.0 / 3);

    std::istringstream bad_header("n,min_energy\n");
    CHECK(code_of([&] { read_results(bad_header); }) == ErrorCode::ParseError);
    std::istringstream bad_row(std::string(kResultsHeader) + "\n1,2,3\n");
    CHECK(code_of([&] { read_results(bad_row); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { emit_results(r, "/nonexistent-dir/x.csv"); }) == ErrorCode::IoError);
}
