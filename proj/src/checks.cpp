#include "incompat/checks.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "incompat/body.hpp"
#include "incompat/constructions.hpp"
#include "incompat/energy.hpp"
#include "incompat/error.hpp"
#include "incompat/linmap.hpp"
#include "incompat/oracles.hpp"
#include "incompat/parallel.hpp"
#include "incompat/random.hpp"
#include "incompat/solve.hpp"

namespace incompat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;

struct Outcome {
    bool passed = false;
    std::string detail;
    bool known_failure = false;
};

std::string fmt(const char *f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Map with orthonormal-frame singular values in [lo, hi] and positive determinant.
Mat2d moderate_map(CounterRng &rng, const InnerProduct2d &g, const InnerProduct2d &h, double lo = 0.3, double hi = 2.5) {
    const Eigen::Vector2d s(rng.uniform(lo, hi), rng.uniform(lo, hi));
    const Mat2d core = rotation(rng.uniform(0.0, kTwoPi)) * s.asDiagonal() * rotation(rng.uniform(0.0, kTwoPi));
    return h.inv_sqrt() * core * g.sqrt();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

////////////////////////////////////////////////////////////////////////////////
// linmap
////////////////////////////////////////////////////////////////////////////////
Outcome norm_sandwich() {
    CounterRng rng(11);
    double worst = -1;
    for (int k = 0; k < 10000; ++k) {
        const LinMap2d A(random_matrix(rng, 3.0), random_metric(rng), random_metric(rng));
        const double op = operator_norm(A), fr = frobenius_norm(A);
        const double tol = 1e-12 * std::max(1.0, fr);
        worst = std::max({worst, op - fr - tol, fr - 2 * op - tol});
    }
    return {worst <= 0, fmt("max violation %.3g over 1e4 samples", std::max(worst, 0.0))};
}

Outcome signed_svd_contract() {
    CounterRng rng(12);
    int bad = 0;
    for (int k = 0; k < 2000; ++k) {
        const LinMap2d A(random_matrix(rng), random_metric(rng), random_metric(rng));
        const auto s = signed_svd(A);
        const double det = A.orthonormal().determinant();
        if (s.sigma(0) < 0 || s.sigma(0) < std::abs(s.sigma(1)) - 1e-12) ++bad;
        if (rel(s.sigma(0) * s.sigma(1), det) > 1e-10) ++bad;
        if (s.sigma(0) + s.sigma(1) > kDegenerateThreshold && !is_special_isometry(s.rotation(), A.domain, A.codomain))
            ++bad;
    }
    return {bad == 0, std::to_string(bad) + " contract violations over 2000 samples"};
}

Outcome distortion_zero_on_so() {
    CounterRng rng(13);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const Mat2d R = oracle::sampled_isometry(g, h, rng.uniform(0.0, kTwoPi));
        worst = std::max(worst, distortion(LinMap2d(R, g, h)));
    }
    return {worst <= 1e-12, fmt("max Dis on SO(g,h) = %.3g", worst)};
}

Outcome distortion_matches_sampling() {
    CounterRng rng(1);
    double worst = 0, below = 0;
    for (int k = 0; k < 1000; ++k) {
        const LinMap2d A(random_matrix(rng), random_metric(rng), random_metric(rng));
        const double exact = distortion(A), sampled = oracle::sampled_distortion(A, 720);
        worst = std::max(worst, std::abs(exact - sampled));
        below = std::max(below, exact - sampled);
    }
    return {worst <= 1e-4 && below <= 1e-12,
            fmt("max |closed form - 720-sample minimum| = %.3g, closed form above sampled by at most %.3g", worst, below)};
}

Outcome so_set_identity() {
    CounterRng rng(15);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d L(moderate_map(rng, g, h), g, h);
        worst = std::max(worst, std::abs(so_set_hausdorff_oracle(g, h, L, 2000) - op_dist_to_SO(L)));
    }
    return {worst <= 5e-3, fmt("max |sampled Hausdorff - op distance| = %.3g", worst)};
}

Outcome so_shift_inequality() {
    CounterRng rng(16);
    double worst = -1e300;
    for (int k = 0; k < 1000; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d A(random_matrix(rng), h, InnerProduct2d::euclidean());
        Mat2d L = random_matrix(rng);
        if (L.determinant() < 0) L.col(0) = -L.col(0);
        const auto [lhs, rhs] = so_shift_gap(A, LinMap2d(L, g, h));
        worst = std::max(worst, lhs - rhs);
    }
    return {worst <= 1e-10, fmt("max (lhs - rhs) = %.3g", worst)};
}

Outcome isometry_invariance() {
    CounterRng rng(17);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        const LinMap2d A(random_matrix(rng), g, h);
        const Mat2d Q = oracle::sampled_isometry(g, g, rng.uniform(0.0, kTwoPi));
        const Mat2d Qp = oracle::sampled_isometry(h, h, rng.uniform(0.0, kTwoPi));
        const double d = distortion(A);
        worst = std::max({worst, rel(distortion(LinMap2d(A.entries * Q, g, h)), d),
                          rel(distortion(LinMap2d(Qp * A.entries, g, h)), d)});
    }
    return {worst <= 1e-12, fmt("max relative change %.3g", worst)};
}

////////////////////////////////////////////////////////////////////////////////
// body
////////////////////////////////////////////////////////////////////////////////
std::vector<BodyMesh> sample_meshes() {
    return {flat_square(4, 1.0), cone_mesh(0.8, 1.0, 16), dislocation_block({0.3, 0.05, 1.0}, 2).mesh,
            dislocation_lattice(2, LatticeRegime::Mean, 0.3, 0.6).mesh, euclidean_triangulation(spherical_cap_factor, 8)};
}

Outcome heron_cross_product() {
    CounterRng rng(21);
    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
        const Vec2d a(rng.uniform(-1, 1), rng.uniform(-1, 1)), b(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const EdgeLengths l = {a.norm(), (b - a).norm(), b.norm()};
        if (!satisfies_triangle_inequality(l)) continue;
        const auto q = flatten_triangle(l);
        const Vec2d e1 = q[1] - q[0], e2 = q[2] - q[0];
        worst = std::max(worst, std::abs(heron_area(l) - 0.5 * (e1.x() * e2.y() - e1.y() * e2.x())));
    }
    return {worst <= 1e-12, fmt("max |Heron - cross/2| = %.3g", worst)};
}

Outcome self_morphism_zero() {
    for (const auto &m : sample_meshes()) {
        const auto s = morphism_stats(m, m);
        if (s.sup_dis != 0 || s.mean_dis != 0 || s.mean_dis_inverse != 0 || s.vol_ratio_dev != 0 || s.global_dis != 0 ||
            s.bilip != 1)
            return {false, fmt("nonzero self statistics: sup %.3g, global %.3g", s.sup_dis, s.global_dis)};
    }
    return {true, "all statistics vanish (bilip = 1) on 5 meshes"};
}

Outcome mean_inverse_trend() {
    std::vector<MorphismStats> seq;
    for (int n : {2, 4, 8}) {
        const auto L = dislocation_lattice(n, LatticeRegime::Mean, 0.3, 0.6);
        seq.push_back(morphism_stats(L.mesh, L.limit));
    }
    const bool ok = seq[0].mean_dis_inverse > seq[1].mean_dis_inverse && seq[1].mean_dis_inverse > seq[2].mean_dis_inverse &&
                    seq[2].bilip < 10;
    return {ok, fmt("mean_dis_inverse = %.4g, %.4g, %.4g", seq[0].mean_dis_inverse, seq[1].mean_dis_inverse,
                    seq[2].mean_dis_inverse)};
}

double deficit_sum(const BodyMesh &m) {
    double sum = 0;
    for (int v = 0; v < m.vertex_count(); ++v)
        if (!m.is_boundary_vertex(v)) sum += kTwoPi - cone_angle(m, v);
    return sum;
}

Outcome block_deficit_sum() {
    double worst = 0;
    for (double theta : {0.1, 0.3, 0.7})
        for (double d : {0.02, 0.05, 0.2}) worst = std::max(worst, std::abs(deficit_sum(dislocation_block({theta, d, 1.0}, 2).mesh)));
    return {worst <= 1e-10, fmt("max |total deficit| = %.3g", worst)};
}

Outcome global_scaling() {
    double worst = 0;
    for (const auto &m : sample_meshes())
        for (double s : {0.5, 1.1, 2.0}) {
            const double expect = std::abs(s - 1) * graph_diameter(m);
            worst = std::max(worst, std::abs(morphism_stats(m, m.scaled(s)).global_dis - expect));
        }
    return {worst <= 1e-10, fmt("max |global_dis - |s-1| diam| = %.3g", worst)};
}

Outcome stats_bounds() {
    for (auto mode : {LatticeRegime::Mean, LatticeRegime::Uniform})
        for (int n : {1, 2, 4}) {
            const auto L = dislocation_lattice(n, mode, 0.3, 0.6);
            const auto s = morphism_stats(L.mesh, L.limit);
            if (!(s.mean_dis <= s.sup_dis * L.mesh.total_area() + 1e-15))
                return {false, fmt("mean_dis %.4g exceeds sup_dis * volume %.4g", s.mean_dis, s.sup_dis * L.mesh.total_area())};
        }
    return {true, "mean_dis <= sup_dis * volume on 6 lattices"};
}

////////////////////////////////////////////////////////////////////////////////
// constructions
////////////////////////////////////////////////////////////////////////////////
Outcome meshes_valid() {
    int count = 0;
    double worst_flat = 0;
    for (int n : {1, 3, 8}) {
        const auto m = flat_square(n, 1.5);
        for (int v = 0; v < m.vertex_count(); ++v)
            if (!m.is_boundary_vertex(v)) worst_flat = std::max(worst_flat, std::abs(cone_angle(m, v) - kTwoPi));
        ++count;
    }
    for (double a : {0.5, 0.8, 1.3}) cone_mesh(a, 2.0, 24), ++count;
    for (int r : {1, 2, 4}) dislocation_block({0.4, 0.1, 1.0}, r), ++count;
    for (int n : {1, 2, 3}) dislocation_lattice(n, LatticeRegime::Uniform, 0.5, 0.3), ++count;
    for (int n : {2, 4}) euclidean_triangulation(spherical_cap_factor, n), euclidean_triangulation_refined(spherical_cap_factor, n, 16), count += 2;
    const auto lat = dislocation_lattice(3, LatticeRegime::Mean, 0.3, 0.6);
    double worst_limit = 0;
    for (int v = 0; v < lat.limit.vertex_count(); ++v)
        if (!lat.limit.is_boundary_vertex(v)) worst_limit = std::max(worst_limit, std::abs(cone_angle(lat.limit, v) - kTwoPi));
    return {worst_flat <= 1e-12 && worst_limit <= 1e-10,
            std::to_string(count) + " meshes valid; flat defects " + fmt("%.2g, limit defects %.2g", worst_flat, worst_limit)};
}

Outcome block_gauss_bonnet() {
    double worst = 0;
    for (double theta : {0.05, 0.3, 1.0})
        for (double d : {0.01, 0.05, 0.3})
            for (int r : {1, 3}) {
                const auto B = dislocation_block({theta, d, 1.0}, r);
                for (int v = 0; v < B.mesh.vertex_count(); ++v) {
                    if (B.mesh.is_boundary_vertex(v)) continue;
                    const double expect = v == B.p_minus ? -2 * theta : v == B.p_plus ? 2 * theta : 0.0;
                    worst = std::max(worst, std::abs(kTwoPi - cone_angle(B.mesh, v) - expect));
                }
                worst = std::max(worst, std::abs(deficit_sum(B.mesh)));
            }
    return {worst <= 1e-10, fmt("max deficit error %.3g (p- = -2 theta, p+ = +2 theta, others 0, total 0)", worst)};
}

Outcome lattice_burgers() {
    double worst = 0, worst_rot = 0;
    for (auto mode : {LatticeRegime::Mean, LatticeRegime::Uniform})
        for (int n : {1, 2, 4, 8}) {
            const auto L = dislocation_lattice(n, mode, 0.3, 0.6);
            double sum = 0;
            for (int c = 0; c < n; ++c)
                for (int r = 0; r < n; ++r) {
                    const auto h = holonomy(L.mesh, L.block_loop(c, r));
                    sum += h.translation.norm();
                    worst_rot = std::max(worst_rot, std::abs(h.rotation_angle));
                }
            worst = std::max(worst, std::abs(sum - L.burgers_total));
        }
    return {worst <= 1e-9 && worst_rot <= 1e-10, fmt("max |sum |b_block| - b0| = %.3g, max block rotation %.3g", worst, worst_rot)};
}

Outcome conformal_defect_halving() {
    std::vector<double> defects;
    for (int n : {8, 16, 32, 64}) defects.push_back(max_cone_defect(euclidean_triangulation(spherical_cap_factor, n)));
    double worst = 1e300;
    for (size_t k = 1; k < defects.size(); ++k) worst = std::min(worst, defects[k - 1] / defects[k]);
    return {worst >= 2, fmt("max defects %.3g .. %.3g, smallest reduction factor %.3g", defects.front(), defects.back(), worst)};
}

Outcome holonomy_double_loop() {
    const auto B = dislocation_block({0.3, 0.05, 1.0}, 2);
    double worst = 0;
    for (const auto &loop : {B.dipole_loop, vertex_loop(B.mesh, B.p_plus), vertex_loop(B.mesh, B.p_minus)}) {
        std::vector<int> twice = loop;
        twice.insert(twice.end(), loop.begin(), loop.end());
        const auto h1 = holonomy(B.mesh, loop), h2 = holonomy(B.mesh, twice);
        const double expect_angle = std::remainder(2 * h1.rotation_angle, kTwoPi);
        const Vec2d expect_t = rotation(h1.rotation_angle) * h1.translation + h1.translation;
        worst = std::max({worst, std::abs(std::remainder(h2.rotation_angle - expect_angle, kTwoPi)),
                          (h2.translation - expect_t).norm()});
    }
    return {worst <= 1e-10, fmt("max composition error %.3g", worst)};
}

////////////////////////////////////////////////////////////////////////////////
// energy
////////////////////////////////////////////////////////////////////////////////
Outcome frame_indifference() {
    CounterRng rng(41);
    double worst = 0;
    for (int k = 0; k < 1000; ++k) {
        const EnergySettings s{2.0 + (k % 3), 1e-12};
        const LinMap2d A(random_matrix(rng));
        const Mat2d Q = rotation(rng.uniform(0.0, kTwoPi)), Qp = rotation(rng.uniform(0.0, kTwoPi));
        const double w = density(A, s);
        worst = std::max({worst, rel(density(LinMap2d(A.entries * Q), s), w), rel(density(LinMap2d(Qp * A.entries), s), w)});
    }
    return {worst <= 1e-12, fmt("max relative change %.3g", worst)};
}

Configuration perturbed(const BodyMesh &m, CounterRng &rng, double amp) {
    Points P = initial_configuration(m, rng.next()).positions();
    double mean_edge = 0;
    for (const auto &e : m.edges()) mean_edge += e.length;
    mean_edge /= double(m.edges().size());
    for (int v = 0; v < P.rows(); ++v)
        for (int c = 0; c < 2; ++c) P(v, c) += amp * mean_edge * rng.uniform(-1, 1);
    return Configuration(std::move(P));
}

double fd_gradient_error(const BodyMesh &m, const Configuration &u, const EnergySettings &s) {
    const Points g = total_gradient(m, u, s);
    Points fd(g.rows(), 2);
    const double h = 1e-6;
    for (int v = 0; v < g.rows(); ++v)
        for (int c = 0; c < 2; ++c) {
            Points P = u.positions();
            P(v, c) += h;
            const double ep = energy_value(m, Configuration(P), s);
            P(v, c) -= 2 * h;
            const double em = energy_value(m, Configuration(P), s);
            fd(v, c) = (ep - em) / (2 * h);
        }
    return (fd - g).norm() / std::max(g.norm(), 1e-300);
}

Outcome gradient_fd() {
    CounterRng rng(42);
    const std::vector<BodyMesh> meshes = {flat_square(3, 1.0), cone_mesh(0.8, 1.0, 8), dislocation_block({0.3, 0.2, 1.0}, 1).mesh,
                                          euclidean_triangulation(spherical_cap_factor, 3)};
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const BodyMesh &m = meshes[k % meshes.size()];
        const EnergySettings s{2.0 + (k / 4) % 3, 1e-12};
        worst = std::max(worst, fd_gradient_error(m, perturbed(m, rng, 0.05), s));
    }
    return {worst <= 1e-5, fmt("max relative error %.3g over 100 pairs, p in {2,3,4}", worst)};
}

Outcome translation_invariance() {
    CounterRng rng(43);
    double worst = 0;
    for (const auto &m : sample_meshes()) {
        const Configuration u = perturbed(m, rng, 0.05);
        Points P = u.positions();
        P.rowwise() += Eigen::RowVector2d(rng.uniform(-10, 10), rng.uniform(-10, 10));
        const EnergySettings s;
        worst = std::max(worst, rel(total_energy(m, Configuration(P), s).total, total_energy(m, u, s).total));
    }
    return {worst <= 1e-12, fmt("max relative change %.3g", worst)};
}

Outcome rotation_invariance() {
    CounterRng rng(44);
    double worst = 0;
    for (const auto &m : sample_meshes()) {
        const Configuration u = perturbed(m, rng, 0.05);
        const Mat2d Q = rotation(rng.uniform(0.0, kTwoPi));
        const Points P = u.positions() * Q.transpose();
        const EnergySettings s;
        worst = std::max(worst, rel(total_energy(m, Configuration(P), s).total, total_energy(m, u, s).total));
    }
    return {worst <= 1e-12, fmt("max relative change %.3g", worst)};
}

Outcome zero_set() {
    CounterRng rng(45);
    int mismatches = 0, cases = 0;
    for (int n : {1, 4, 8}) {
        const BodyMesh m = flat_square(n, 1.0);
        const Mat2d Q = rotation(rng.uniform(0.0, kTwoPi));
        const Points iso = flat_square_layout(n, 1.0).positions() * Q.transpose();
        for (double amp : {0.0, 1e-3, 0.1}) {
            Points P = iso;
            for (int v = 0; v < P.rows(); ++v) P(v, 0) += amp * rng.uniform(-1, 1) / n;
            const Configuration u(P);
            const EnergySettings s;
            bool all_so = true;
            for (int t = 0; t < m.triangle_count(); ++t) all_so &= distortion(deformation_gradient(m, u, t)) <= 1e-10;
            const bool zero = total_energy(m, u, s).total <= 1e-20;
            mismatches += zero != all_so;
            ++cases;
        }
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches over " + std::to_string(cases) + " configurations"};
}

Outcome p_regularity() {
    std::ostringstream os;
    bool ok = true;
    for (double p : {2.0, 4.0}) {
        const auto r = p_regularity_check(10000, EnergySettings{p, 1e-12}, 7);
        ok &= r.all();
        os << "p=" << p << ": " << r.violations << " violations (margins " << r.coercivity_margin << ", "
           << r.boundedness_margin << ", " << r.lipschitz_margin << "); ";
    }
    return {ok, os.str()};
}

////////////////////////////////////////////////////////////////////////////////
// solve
////////////////////////////////////////////////////////////////////////////////
Outcome gauge() {
    double worst = 0;
    SolveOptions o;
    o.seed = 3;
    for (const BodyMesh &m : {flat_square(4, 1.0), cone_mesh(0.8, 1.0, 16)}) {
        const auto r = minimize(m, initial_configuration(m, 5), EnergySettings{}, o);
        worst = std::max(worst, centroid(m, r.u).norm());
    }
    return {worst <= 1e-12, fmt("max |centroid| = %.3g", worst)};
}

Outcome monotone_line_search() {
    SolveOptions o;
    int bad = 0, steps = 0;
    for (const BodyMesh &m : {cone_mesh(0.8, 1.0, 16), dislocation_block({0.3, 0.1, 1.0}, 2).mesh}) {
        const auto r = minimize(m, initial_configuration(m, 9), EnergySettings{}, o);
        double prev = r.initial_energy;
        for (const auto &rec : r.log) {
            bad += !(rec.energy <= prev - o.armijo_c * rec.step * rec.slope);
            prev = rec.energy;
            ++steps;
        }
    }
    return {bad == 0, std::to_string(bad) + " Armijo violations over " + std::to_string(steps) + " iterations"};
}

std::string experiment_csv(int threads) {
    const int saved = thread_count();
    set_thread_count(threads);
    SolveOptions o;
    o.seed = 17;
    const auto r = gamma_experiment(lattice_sequence(LatticeRegime::Uniform, 0.3, 0.6), {2, 4}, EnergySettings{}, o);
    set_thread_count(saved);
    std::ostringstream os;
    write_results(os, r);
    return os.str();
}

Outcome determinism() {
    const std::string a = experiment_csv(1), b = experiment_csv(1), c = experiment_csv(4);
    return {a == b && a == c, a == b ? (a == c ? "bit-identical at 1, 1 and 4 threads" : "differs across thread counts")
                                     : "differs between identical runs"};
}

const SequenceResult &uniform_experiment() {
    static std::optional<SequenceResult> cached;
    if (!cached)
        cached = gamma_experiment(lattice_sequence(LatticeRegime::Uniform, 0.3, 0.6), {2, 4, 8, 16}, EnergySettings{},
                                  SolveOptions{});
    return *cached;
}

Outcome uniform_energy_decay() {
    const auto &rows = uniform_experiment().rows;
    bool monotone = true;
    for (size_t k = 1; k < rows.size(); ++k) monotone &= rows[k].min_energy <= rows[k - 1].min_energy + 1e-10;
    const double ratio = rows.back().min_energy / rows.front().min_energy;
    Outcome out{monotone && ratio < 1e-4, ""};
    out.detail = std::string(monotone ? "non-increasing" : "NOT non-increasing") +
                 fmt("; min_energy(16)/min_energy(2) = %.3g (target < 1e-4)", ratio);
    if (monotone && !out.passed) {
        out.known_failure = true;
        out.detail += "; the lattice carries total Burgers content b0, so the minimum scales like b0^2/n^2 and "
                      "this ratio cannot reach 1e-4 by n = 16";
    }
    return out;
}

Outcome minimizer_convergence() {
    const auto &rows = uniform_experiment().rows;
    const size_t m = rows.size();
    const bool ok = rows[m - 3].minimizer_lp_dist > rows[m - 2].minimizer_lp_dist &&
                    rows[m - 2].minimizer_lp_dist > rows[m - 1].minimizer_lp_dist;
    return {ok, fmt("minimizer_lp_dist over the last three n: %.4g, %.4g, %.4g", rows[m - 3].minimizer_lp_dist,
                    rows[m - 2].minimizer_lp_dist, rows[m - 1].minimizer_lp_dist)};
}

Outcome results_round_trip() {
    SequenceResult r;
    CounterRng rng(51);
    for (int n : {2, 4, 8}) {
        SequenceRow row;
        row.n = n;
        row.min_energy = rng.uniform() * 1e-3;
        row.grad_norm = rng.uniform() * 1e-9;
        row.stats = {rng.uniform(), rng.uniform() / 3, rng.uniform() / 7, 1 + rng.uniform(), rng.uniform() * 1e-5, kPi};
        row.minimizer_lp_dist = std::ldexp(rng.uniform(), -40);
        r.rows.push_back(row);
    }
    std::stringstream ss;
    write_results(ss, r);
    const auto back = read_results(ss);
    std::ostringstream again;
    write_results(again, back);
    bool same = back.rows.size() == r.rows.size();
    for (size_t k = 0; same && k < r.rows.size(); ++k) {
        const auto &a = r.rows[k], &b = back.rows[k];
        same = a.n == b.n && a.min_energy == b.min_energy && a.grad_norm == b.grad_norm && a.stats.sup_dis == b.stats.sup_dis &&
               a.stats.mean_dis == b.stats.mean_dis && a.stats.mean_dis_inverse == b.stats.mean_dis_inverse &&
               a.stats.bilip == b.stats.bilip && a.stats.vol_ratio_dev == b.stats.vol_ratio_dev &&
               a.stats.global_dis == b.stats.global_dis && a.minimizer_lp_dist == b.minimizer_lp_dist;
    }
    return {same && again.str() == ss.str(), same ? "bit-exact round trip" : "values changed in round trip"};
}

struct Entry {
    const char *name;
    const char *description;
    Outcome (*run)();
};

const Entry kChecks[] = {
    {"linmap.norm_sandwich", "|A|_op <= |A|_2 <= 2 |A|_op on 1e4 random maps", norm_sandwich},
    {"linmap.signed_svd_contract", "sigma ordering, det sign and rotation factor in SO(g,h)", signed_svd_contract},
    {"linmap.distortion_zero_on_so", "Dis vanishes on constructed members of SO(g,h)", distortion_zero_on_so},
    {"linmap.distortion_matches_sampling", "Dis equals the 720-rotation brute-force minimum", distortion_matches_sampling},
    {"linmap.so_set_identity", "sampled Hausdorff distance of SO sets equals op_dist_to_SO(L)", so_set_identity},
    {"linmap.so_shift_inequality", "|dist(AL, SO(L*h)) - dist(A, SO(h))| <= (|A| + 2) Dis L", so_shift_inequality},
    {"linmap.isometry_invariance", "Dis(AQ) = Dis(Q'A) = Dis(A)", isometry_invariance},
    {"body.heron_cross_product", "Heron area equals half the cross product of the flattening", heron_cross_product},
    {"body.self_morphism_zero", "morphism statistics of a mesh against itself vanish", self_morphism_zero},
    {"body.mean_inverse_trend", "mean_dis_inverse decreases along a mean-converging lattice", mean_inverse_trend},
    {"body.block_deficit_sum", "cone deficits of a dislocation block sum to zero", block_deficit_sum},
    {"body.global_scaling", "global_dis against scaled lengths is |s - 1| times the diameter", global_scaling},
    {"body.stats_bounds", "mean_dis <= sup_dis * volume", stats_bounds},
    {"constructions.meshes_valid", "every generator output passes the mesh invariants", meshes_valid},
    {"constructions.block_gauss_bonnet", "deficits -2 theta at p-, +2 theta at p+, zero elsewhere", block_gauss_bonnet},
    {"constructions.lattice_burgers", "per-block Burgers magnitudes sum to b0 for every n", lattice_burgers},
    {"constructions.conformal_defect_halving", "max cone defect at least halves per refinement", conformal_defect_halving},
    {"constructions.holonomy_double_loop", "a loop traversed twice squares its holonomy", holonomy_double_loop},
    {"energy.frame_indifference", "W(AQ) = W(Q'A) = W(A)", frame_indifference},
    {"energy.gradient_fd", "analytic gradient matches central differences", gradient_fd},
    {"energy.translation_invariance", "energy unchanged by translating the configuration", translation_invariance},
    {"energy.rotation_invariance", "energy unchanged by rotating the configuration", rotation_invariance},
    {"energy.zero_set", "zero energy exactly when every triangle map is a rotation", zero_set},
    {"energy.p_regularity", "coercivity, boundedness and metric-Lipschitz bounds at p = 2, 4", p_regularity},
    {"solve.gauge", "minimizers have zero area-weighted centroid", gauge},
    {"solve.monotone_line_search", "each accepted step satisfies the Armijo decrease", monotone_line_search},
    {"solve.determinism", "experiment CSV is bit-identical across runs and thread counts", determinism},
    {"solve.uniform_energy_decay", "uniform lattice minima non-increasing, last < 1e-4 of first", uniform_energy_decay},
    {"solve.minimizer_convergence", "minimizer distance decreases over the last three n", minimizer_convergence},
    {"cli.results_round_trip", "results CSV parses back bit-exactly", results_round_trip},
};

} // namespace

std::vector<CheckInfo> list_checks() {
    std::vector<CheckInfo> out;
    for (const auto &e : kChecks) out.push_back({e.name, e.description});
    return out;
}

std::vector<CheckResult> run_checks(const std::string &filter, const std::function<void(const CheckResult &)> &on_result) {
    std::vector<CheckResult> out;
    for (const auto &e : kChecks) {
        if (!filter.empty() && std::string(e.name).find(filter) == std::string::npos) continue;
        CheckResult r;
        r.name = e.name;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Outcome o = e.run();
            r.passed = o.passed;
            r.known_failure = o.known_failure;
            r.detail = o.detail;
        } catch (const std::exception &ex) {
            r.passed = false;
            r.detail = std::string("threw: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace incompat
