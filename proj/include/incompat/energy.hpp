////////////////////////////////////////////////////////////////////////////////
// energy.hpp
////////////////////////////////////////////////////////////////////////////////
//  W(A) = Dis(A)^p, its gradient, and the discrete energy
//  E[u] = sum_T Area(T) W(dF_T) of a piecewise-affine configuration.
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <cstdint>
#include <vector>

#include "incompat/body.hpp"
#include "incompat/linmap.hpp"

namespace incompat {

struct EnergySettings {
    double p = 2.0;
    double dis_floor = 1e-12;

    void validate() const;
};

struct EnergyReport {
    double total = 0;
    std::vector<double> per_triangle;
    double grad_norm = 0;
};

double density(const LinMap2d &A, const EnergySettings &settings);

// dW/dA with respect to the plain matrix entries of A:
// p Dis^{p-2} (A - R) in orthonormal frames, pulled back to A's coordinates.
LinMap2d density_gradient(const LinMap2d &A, const EnergySettings &settings);

// Energy of every triangle and the assembled vertex gradient, in one pass.
struct EnergyEvaluation {
    double total = 0;
    std::vector<double> per_triangle;
    Points gradient;
};

EnergyEvaluation evaluate_energy(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings,
                                 bool with_gradient = true);
// Energy only; skips the gradient (line-search trial points).
double energy_value(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings);

EnergyReport total_energy(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings);
Points total_gradient(const BodyMesh &mesh, const Configuration &u, const EnergySettings &settings);

struct RegularityReport {
    int samples = 0;
    bool coercivity = false, boundedness = false, lipschitz = false;
    // Smallest observed (rhs - lhs) of each inequality; negative means violated.
    double coercivity_margin = 0, boundedness_margin = 0, lipschitz_margin = 0;
    int violations = 0;

    bool all() const { return coercivity && boundedness && lipschitz; }
};

// Random (A, L, g, h) over several orders of magnitude of |A|, checking
//   W(A) >= 2^{1-p} |A|^p - 2^{p/2},   W(A) <= 2^p (|A|^p + 1),
//   |W(A o L)^{1/p} - W(A)^{1/p}| <= (|A|_2 + 4) Dis L.
RegularityReport p_regularity_check(int samples, const EnergySettings &settings, std::uint64_t seed = 1);

} // namespace incompat
