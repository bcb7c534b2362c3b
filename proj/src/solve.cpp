#include "incompat/solve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <numbers>
#include <unordered_map>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "incompat/error.hpp"
#include "incompat/random.hpp"

namespace incompat {

void SolveOptions::validate() const {
    const auto bad = [](const char *what) { throw Error(ErrorCode::BadParams, what); };
    if (max_iters < 1) bad("max_iters must be positive");
    if (!(grad_tol > 0) || !std::isfinite(grad_tol)) bad("grad_tol must be positive");
    if (!(armijo_c > 0 && armijo_c < 1)) bad("armijo_c must lie in (0, 1)");
    if (!(backtrack > 0 && backtrack < 1)) bad("backtrack must lie in (0, 1)");
    if (memory < 0) bad("memory must be >= 0");
}

std::string to_string(StopReason r) { return r == StopReason::GradTol ? "grad_tol" : "max_iters"; }

namespace {

constexpr int kMaxHalvings = 60;

double dot(const Points &a, const Points &b) { return (a.array() * b.array()).sum(); }

std::vector<double> lumped_mass(const BodyMesh &mesh) {
    std::vector<double> m(mesh.vertex_count(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t)
        for (int v : mesh.triangle(t)) m[v] += mesh.area(t) / 3;
    return m;
}

// Cotangent stiffness of the reference metric plus a small multiple of the lumped mass.
class Preconditioner {
public:
    explicit Preconditioner(const BodyMesh &mesh) {
        const int nv = mesh.vertex_count();
        std::vector<Eigen::Triplet<double>> K;
        K.reserve(9 * mesh.triangle_count());
        double diag = 0;
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            const Triangle &tri = mesh.triangle(t);
            for (int c = 0; c < 3; ++c) {
                const double w = 0.5 / std::tan(corner_angle(mesh.lengths(t), c));
                const int i = tri[(c + 1) % 3], j = tri[(c + 2) % 3];
                K.emplace_back(i, j, -w);
                K.emplace_back(j, i, -w);
                K.emplace_back(i, i, w);
                K.emplace_back(j, j, w);
                diag += 2 * w;
            }
        }
        const auto mass = lumped_mass(mesh);
        const double mass_total = mesh.total_area();
        const double eps = 1e-6 * diag / mass_total;
        for (int v = 0; v < nv; ++v) K.emplace_back(v, v, eps * mass[v]);
        Eigen::SparseMatrix<double> P(nv, nv);
        P.setFromTriplets(K.begin(), K.end());
        m_solver.compute(P);
        if (m_solver.info() != Eigen::Success)
            throw Error(ErrorCode::InvalidMesh, "reference stiffness matrix could not be factored");
    }

    Points apply_inverse(const Points &g) const { return m_solver.solve(g); }

private:
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> m_solver;
};

struct CurvaturePair {
    Points s, y;
    double rho;
};

Points lbfgs_direction(const Preconditioner &P, const std::deque<CurvaturePair> &pairs, const Points &g) {
    Points q = g;
    std::vector<double> a(pairs.size());
    for (int i = int(pairs.size()) - 1; i >= 0; --i) {
        a[i] = pairs[i].rho * dot(pairs[i].s, q);
        q -= a[i] * pairs[i].y;
    }
    Points r = P.apply_inverse(q);
    if (!pairs.empty()) {
        const auto &last = pairs.back();
        r *= dot(last.s, last.y) / dot(last.y, P.apply_inverse(last.y));
    }
    for (size_t i = 0; i < pairs.size(); ++i) {
        const double b = pairs[i].rho * dot(pairs[i].y, r);
        r += (a[i] - b) * pairs[i].s;
    }
    return -r;
}

} // namespace

Vec2d centroid(const BodyMesh &mesh, const Configuration &u) {
    const auto mass = lumped_mass(mesh);
    Vec2d c = Vec2d::Zero();
    double total = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        c += mass[v] * u.position(v);
        total += mass[v];
    }
    return c / total;
}

Configuration mean_zero(const BodyMesh &mesh, const Configuration &u) {
    const Vec2d c = centroid(mesh, u);
    Points P = u.positions();
    P.rowwise() -= c.transpose();
    return Configuration(std::move(P));
}

SolveResult minimize(const BodyMesh &mesh, const Configuration &u0, const EnergySettings &settings,
                     const SolveOptions &opts) {
    settings.validate();
    opts.validate();
    if (settings.p < 2)
        throw Error(ErrorCode::NonDifferentiable, "the solver needs p >= 2; Dis^p is not differentiable at SO for p < 2");
    if (u0.vertex_count() != mesh.vertex_count())
        throw Error(ErrorCode::BadParams, "initial configuration does not match the mesh");

    const Preconditioner P(mesh);
    std::deque<CurvaturePair> pairs;
    Points u = u0.positions();
    auto eval = evaluate_energy(mesh, u0, settings);

    SolveResult out;
    out.initial_energy = eval.total;
    double step_guess = 1;
    int it = 0;
    for (; it < opts.max_iters; ++it) {
        if (eval.gradient.norm() < opts.grad_tol) {
            out.stop = StopReason::GradTol;
            break;
        }
        Points d = lbfgs_direction(P, pairs, eval.gradient);
        double slope = dot(eval.gradient, d);
        if (!(slope < 0)) {
            pairs.clear();
            d = -P.apply_inverse(eval.gradient);
            slope = dot(eval.gradient, d);
        }

        EnergyEvaluation next;
        double step = 0;
        for (int attempt = 0; attempt < 2; ++attempt) {
            step = pairs.empty() ? step_guess : 1.0;
            bool accepted = false;
            for (int k = 0; k <= kMaxHalvings && !accepted; ++k, step *= opts.backtrack) {
                try {
                    next = evaluate_energy(mesh, Configuration(u + step * d), settings);
                    accepted = std::isfinite(next.total) && next.total <= eval.total + opts.armijo_c * step * slope;
                } catch (const Error &e) {
                    if (e.code() != ErrorCode::DegenerateMap) throw;
                }
                if (accepted) break;
            }
            if (accepted) break;
            if (attempt == 1 || pairs.empty())
                throw Error(ErrorCode::LineSearchFailed, "no sufficient decrease after " +
                                                             std::to_string(kMaxHalvings) + " step reductions at iteration " +
                                                             std::to_string(it) + " (energy " + format_double(eval.total) + ")");
            pairs.clear();
            d = -P.apply_inverse(eval.gradient);
            slope = dot(eval.gradient, d);
        }

        Points s = step * d;
        Points y = next.gradient - eval.gradient;
        const double sy = dot(s, y);
        if (opts.memory > 0 && sy > 1e-12 * s.norm() * y.norm()) {
            pairs.push_back({std::move(s), std::move(y), 1 / sy});
            if (int(pairs.size()) > opts.memory) pairs.pop_front();
        }
        step_guess = std::min(1.0, step / opts.backtrack);
        u += step * d;
        out.log.push_back({next.total, step, -slope});
        eval = std::move(next);
    }
    out.iterations = it;
    if (it == opts.max_iters && eval.gradient.norm() < opts.grad_tol) out.stop = StopReason::GradTol;

    // Report the energy of the returned, re-centred configuration itself.
    out.u = mean_zero(mesh, Configuration(std::move(u)));
    out.report = total_energy(mesh, out.u, settings);
    return out;
}

Configuration initial_configuration(const BodyMesh &mesh, std::uint64_t seed) {
    if (!mesh.has_boundary()) throw Error(ErrorCode::ClosedSurface, "Tutte layout needs a boundary");
    const std::vector<int> loop = mesh.boundary_loop();
    if (loop.size() < 3) throw Error(ErrorCode::BadParams, "Tutte layout needs at least 3 boundary vertices");
    const int nv = mesh.vertex_count();

    std::unordered_map<std::uint64_t, double> edge_length;
    std::vector<std::vector<int>> adj(nv);
    double mean_edge = 0;
    for (const Edge &e : mesh.edges()) {
        edge_length[(std::uint64_t(e.a) << 32) | std::uint64_t(e.b)] = e.length;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
        mean_edge += e.length;
    }
    mean_edge /= double(mesh.edges().size());
    const auto length = [&](int a, int b) {
        return edge_length.at((std::uint64_t(std::min(a, b)) << 32) | std::uint64_t(std::max(a, b)));
    };

    Points X = Points::Zero(nv, 2);
    const double radius = 0.5 * graph_diameter(mesh);
    std::vector<double> arc(loop.size() + 1, 0.0);
    for (size_t k = 0; k < loop.size(); ++k) arc[k + 1] = arc[k] + length(loop[k], loop[(k + 1) % loop.size()]);
    for (size_t k = 0; k < loop.size(); ++k) {
        const double phi = 2 * std::numbers::pi * arc[k] / arc.back();
        X.row(loop[k]) << radius * std::cos(phi), radius * std::sin(phi);
    }

    std::vector<int> index(nv, -1);
    int ni = 0;
    for (int v = 0; v < nv; ++v)
        if (!mesh.is_boundary_vertex(v)) index[v] = ni++;
    if (ni > 0) {
        std::vector<Eigen::Triplet<double>> T;
        Points rhs = Points::Zero(ni, 2);
        for (int v = 0; v < nv; ++v) {
            if (index[v] < 0) continue;
            T.emplace_back(index[v], index[v], double(adj[v].size()));
            for (int w : adj[v]) {
                if (index[w] >= 0) T.emplace_back(index[v], index[w], -1.0);
                else rhs.row(index[v]) += X.row(w);
            }
        }
        Eigen::SparseMatrix<double> A(ni, ni);
        A.setFromTriplets(T.begin(), T.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
        if (solver.info() != Eigen::Success) throw Error(ErrorCode::InvalidMesh, "Tutte system could not be factored");
        const Points interior = solver.solve(rhs);
        for (int v = 0; v < nv; ++v)
            if (index[v] >= 0) X.row(v) = interior.row(index[v]);
    }

    CounterRng rng(seed, 0x7177e);
    const double amp = 1e-2 * mean_edge;
    for (int v = 0; v < nv; ++v) {
        X(v, 0) += rng.uniform(-amp, amp);
        X(v, 1) += rng.uniform(-amp, amp);
    }
    return Configuration(std::move(X));
}

double aligned_lp_distance(const BodyMesh &mesh, const Configuration &u, const Configuration &w, double p) {
    if (u.vertex_count() != mesh.vertex_count() || w.vertex_count() != mesh.vertex_count())
        throw Error(ErrorCode::BadParams, "configurations do not match the mesh");
    const auto mass = lumped_mass(mesh);
    const Points a = mean_zero(mesh, u).positions(), b = mean_zero(mesh, w).positions();
    Mat2d M = Mat2d::Zero();
    for (int v = 0; v < mesh.vertex_count(); ++v) M += mass[v] * b.row(v).transpose() * a.row(v);
    const Mat2d R = rotation(std::atan2(M(1, 0) - M(0, 1), M(0, 0) + M(1, 1)));
    double sum = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        sum += mass[v] * std::pow((R * a.row(v).transpose() - b.row(v).transpose()).norm(), p);
    return std::pow(sum, 1 / p);
}

////////////////////////////////////////////////////////////////////////////////
// Sequence experiments
////////////////////////////////////////////////////////////////////////////////
SequenceGenerator lattice_sequence(LatticeRegime mode, double theta0, double epsilon, int refinement) {
    return [=](int n) {
        auto lattice = dislocation_lattice(n, mode, theta0, epsilon, refinement);
        return MeshPair{std::move(lattice.mesh), std::move(lattice.limit)};
    };
}

SequenceGenerator conformal_sequence(ConformalFactor phi, int reference_n) {
    auto reference = std::make_shared<BodyMesh>(euclidean_triangulation(phi, reference_n));
    return [phi = std::move(phi), reference_n, reference](int n) {
        return MeshPair{euclidean_triangulation_refined(phi, n, reference_n), *reference};
    };
}

namespace {

bool same_mesh(const BodyMesh &a, const BodyMesh &b) { return a.same_connectivity(b) && a.lengths() == b.lengths(); }

} // namespace

SequenceResult gamma_experiment(const SequenceGenerator &generator, const std::vector<int> &n_list,
                                const EnergySettings &settings, const SolveOptions &opts,
                                const ExperimentOptions &experiment) {
    settings.validate();
    opts.validate();
    if (n_list.empty()) throw Error(ErrorCode::EmptySequence, "n_list is empty");
    for (size_t k = 1; k < n_list.size(); ++k)
        if (n_list[k] <= n_list[k - 1]) throw Error(ErrorCode::BadParams, "n_list must be strictly increasing");

    SequenceResult out;
    BodyMesh cached_limit, previous_mesh;
    Configuration limit_u, previous_u;
    double limit_energy = 0;
    bool have_limit = false, have_previous = false;

    for (int n : n_list) {
        const MeshPair pair = generator(n);
        if (!pair.mesh.same_connectivity(pair.limit))
            throw Error(ErrorCode::ConnectivityMismatch, "sequence element and limit differ in connectivity");

        if (!have_limit || !same_mesh(cached_limit, pair.limit)) {
            // Flat limits develop isometrically; the Tutte start covers the rest.
            Configuration start = develop(pair.limit);
            const Configuration tutte = initial_configuration(pair.limit, opts.seed);
            if (energy_value(pair.limit, tutte, settings) < energy_value(pair.limit, start, settings)) start = tutte;
            auto res = minimize(pair.limit, start, settings, opts);
            cached_limit = pair.limit;
            limit_u = std::move(res.u);
            limit_energy = res.report.total;
            have_limit = true;
        }

        SequenceRow row;
        row.n = n;
        row.limit_energy = limit_energy;
        row.recovery_energy = energy_value(pair.mesh, limit_u, settings);

        Configuration start;
        if (!experiment.warm_start) start = initial_configuration(pair.mesh, opts.seed);
        else if (have_previous && previous_mesh.same_connectivity(pair.mesh)) start = previous_u;
        else start = limit_u;

        auto res = minimize(pair.mesh, start, settings, opts);
        row.min_energy = res.report.total;
        row.grad_norm = res.report.grad_norm;
        row.iterations = res.iterations;
        row.stop = res.stop;
        row.stats = morphism_stats(pair.mesh, pair.limit);
        row.minimizer_lp_dist = aligned_lp_distance(pair.limit, res.u, limit_u, settings.p);
        out.rows.push_back(row);

        previous_mesh = pair.mesh;
        previous_u = std::move(res.u);
        have_previous = true;
    }
    return out;
}

} // namespace incompat
