#include "incompat/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "incompat/error.hpp"
#include "incompat/parallel.hpp"
#include "incompat/random.hpp"

namespace incompat {

void EnergySettings::validate() const {
    if (!(p > 1) || !std::isfinite(p)) throw Error(ErrorCode::BadParams, "p must lie in (1, inf)");
    if (!(dis_floor >= 0) || !std::isfinite(dis_floor)) throw Error(ErrorCode::BadParams, "dis_floor must be >= 0");
}

double density(const LinMap2d &A, const EnergySettings &settings) {
    return std::pow(distortion(A), settings.p);
}

LinMap2d density_gradient(const LinMap2d &A, const EnergySettings &settings) {
    const Mat2d M = A.orthonormal();
    const auto svd = detail::signed_svd_raw<double>(M);
    const double dis = (svd.sigma - Vec2d::Ones()).norm();
    LinMap2d out(Mat2d::Zero(), A.domain, A.codomain);
    if (dis <= settings.dis_floor) {
        if (settings.p < 2)
            throw Error(ErrorCode::NonDifferentiable, "Dis(A)^p with p < 2 is not differentiable at SO");
        return out;
    }
    const Mat2d G = settings.p * std::pow(dis, settings.p - 2) * (M - svd.rotation());
    if (A.domain.is_euclidean() && A.codomain.is_euclidean()) {
        out.entries = G;
        return out;
    }
    // M = S_h A S_g^{-1} with symmetric S, so dW/dA = S_h G S_g^{-1}.
    out.entries = A.codomain.sqrt() * G * A.domain.inv_sqrt();
    return out;
}

namespace {

// Per-triangle pieces written into slots; assembly runs serially afterwards.
struct TriangleTerm {
    double energy = 0;
    Mat2d dD = Mat2d::Zero(); // dE_T / d[u1 - u0, u2 - u0]
};

TriangleTerm triangle_term(const BodyMesh &mesh, const Configuration &u, int t, const EnergySettings &s,
                           bool with_gradient) {
    const LinMap2d F = deformation_gradient(mesh, u, t);
    TriangleTerm out;
    const double area = mesh.area(t);
    if (!with_gradient) {
        out.energy = area * density(F, s);
        return out;
    }
    const auto svd = detail::signed_svd_raw<double>(F.entries);
    const double dis = (svd.sigma - Vec2d::Ones()).norm();
    out.energy = area * std::pow(dis, s.p);
    if (dis <= s.dis_floor) {
        if (s.p < 2)
            throw Error(ErrorCode::NonDifferentiable,
                        "triangle " + std::to_string(t) + " sits at Dis = 0 and p < 2");
        return out;
    }
    const Mat2d G = s.p * std::pow(dis, s.p - 2) * (F.entries - svd.rotation());
    out.dD = area * G * mesh.reference_inverse(t).transpose();
    return out;
}

} // namespace

EnergyEvaluation evaluate_energy(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings,
                                 bool with_gradient) {
    settings.validate();
    if (u.vertex_count() != mesh.vertex_count())
        throw Error(ErrorCode::BadParams, "configuration has " + std::to_string(u.vertex_count()) +
                                              " vertices, mesh has " + std::to_string(mesh.vertex_count()));
    const int nt = mesh.triangle_count();
    std::vector<TriangleTerm> terms(nt);
    parallel_for(nt, [&](int b, int e) {
        for (int t = b; t < e; ++t) terms[t] = triangle_term(mesh, u, t, settings, with_gradient);
    });

    EnergyEvaluation out;
    out.per_triangle.resize(nt);
    for (int t = 0; t < nt; ++t) {
        out.per_triangle[t] = terms[t].energy;
        out.total += terms[t].energy;
    }
    if (!with_gradient) return out;
    out.gradient = Points::Zero(mesh.vertex_count(), 2);
    for (int t = 0; t < nt; ++t) {
        const Triangle &tri = mesh.triangle(t);
        const Mat2d &D = terms[t].dD;
        out.gradient.row(tri[1]) += D.col(0).transpose();
        out.gradient.row(tri[2]) += D.col(1).transpose();
        out.gradient.row(tri[0]) -= (D.col(0) + D.col(1)).transpose();
    }
    return out;
}

double energy_value(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings) {
    return evaluate_energy(mesh, u, settings, false).total;
}

EnergyReport total_energy(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings) {
    auto eval = evaluate_energy(mesh, u, settings, true);
    EnergyReport out;
    out.total = eval.total;
    out.per_triangle = std::move(eval.per_triangle);
    out.grad_norm = eval.gradient.norm();
    return out;
}

Points total_gradient(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings) {
    return evaluate_energy(mesh, u, settings, true).gradient;
}

RegularityReport p_regularity_check(int samples, const EnergySettings &settings, std::uint64_t seed) {
    settings.validate();
    if (samples < 1) throw Error(ErrorCode::BadParams, "samples must be positive");
    const double p = settings.p;
    const double alpha = std::pow(2.0, 1 - p), beta = std::pow(2.0, p / 2), gamma = std::pow(2.0, p);
    const double inf = std::numeric_limits<double>::infinity();

    RegularityReport out;
    out.samples = samples;
    out.coercivity_margin = out.boundedness_margin = out.lipschitz_margin = inf;
    CounterRng rng(seed, 0x5e9);
    const InnerProduct2d e = InnerProduct2d::euclidean();
    const auto record = [&](double &margin, bool &ok_flag, double rhs, double lhs) {
        const double m = rhs - lhs;
        margin = std::min(margin, m);
        if (m < -1e-10 * std::max(1.0, std::abs(rhs))) ++out.violations, ok_flag = false;
    };
    out.coercivity = out.boundedness = out.lipschitz = true;
    for (int k = 0; k < samples; ++k) {
        const InnerProduct2d g = random_metric(rng), h = random_metric(rng);
        // |A| spread over 1e-2 .. 1e2; every 16th A lies on SO(h, e), every 16th L on SO(g, h).
        const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
        Mat2d A = random_matrix(rng, scale);
        if (k % 16 == 0) A = rotation(rng.uniform(0.0, 6.283185307179586)) * h.sqrt();
        Mat2d L = random_matrix(rng, 2.0);
        if (k % 16 == 1) L = h.inv_sqrt() * rotation(rng.uniform(0.0, 6.283185307179586)) * g.sqrt();
        if (L.determinant() < 0) L.col(0) = -L.col(0);

        const LinMap2d Amap(A, h, e), Lmap(L, g, h);
        const double normA = frobenius_norm(Amap), W = density(Amap, settings);
        record(out.coercivity_margin, out.coercivity, W, alpha * std::pow(normA, p) - beta);
        record(out.boundedness_margin, out.boundedness, gamma * (std::pow(normA, p) + 1), W);

        const double shifted = std::pow(density(compose(Amap, Lmap), settings), 1 / p);
        const double lhs = std::abs(shifted - std::pow(W, 1 / p));
        record(out.lipschitz_margin, out.lipschitz, (normA + 4) * distortion(Lmap), lhs);
    }
    return out;
}

} // namespace incompat
