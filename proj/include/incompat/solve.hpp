////////////////////////////////////////////////////////////////////////////////
// solve.hpp
////////////////////////////////////////////////////////////////////////////////
//  Energy minimization over configurations and the refinement experiments
//  comparing minima and minimizers along a converging sequence of meshes.
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "incompat/body.hpp"
#include "incompat/constructions.hpp"
#include "incompat/energy.hpp"

namespace incompat {

struct SolveOptions {
    int max_iters = 5000;
    double grad_tol = 1e-8;
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    std::uint64_t seed = 0;
    // Stored curvature pairs; 0 gives preconditioned gradient descent.
    int memory = 8;

    void validate() const;
};

enum class StopReason { GradTol, MaxIters };
std::string to_string(StopReason r);

struct IterationRecord {
    double energy = 0; // after the step
    double step = 0;
    double slope = 0; // -grad . direction at the start of the step (> 0)
};

struct SolveResult {
    Configuration u; // mean-zero
    EnergyReport report;
    int iterations = 0;
    StopReason stop = StopReason::MaxIters;
    double initial_energy = 0;
    std::vector<IterationRecord> log;
};

// Laplacian-preconditioned L-BFGS with Armijo backtracking.  Throws
// LineSearchFailed when 60 step reductions do not give sufficient decrease
// even along the preconditioned gradient.
SolveResult minimize(const BodyMesh &mesh, const Configuration &u0, const EnergySettings &settings,
                     const SolveOptions &opts);

// Area-weighted mean of the piecewise-affine image.
Vec2d centroid(const BodyMesh &mesh, const Configuration &u);
Configuration mean_zero(const BodyMesh &mesh, const Configuration &u);

// Tutte layout: boundary on a circle of radius half the graph diameter,
// interior vertices at the average of their neighbours, then seeded jitter
// of 1e-2 times the mean edge length.
Configuration initial_configuration(const BodyMesh &mesh, std::uint64_t seed);

// (sum_T Area_T mean_{v in T} |u(v) - w(v)|^p)^{1/p} after removing the mean of
// both and rotating u onto w; areas from `mesh`.
double aligned_lp_distance(const BodyMesh &mesh, const Configuration &u, const Configuration &w, double p);

////////////////////////////////////////////////////////////////////////////////
// Sequence experiments
////////////////////////////////////////////////////////////////////////////////
struct MeshPair {
    BodyMesh mesh;  // M_n
    BodyMesh limit; // M on the same connectivity
};

using SequenceGenerator = std::function<MeshPair(int n)>;

SequenceGenerator lattice_sequence(LatticeRegime mode, double theta0, double epsilon, int refinement = 2);
// M_n = euclidean_triangulation(phi, n) carried onto the reference grid, M = euclidean_triangulation(phi, reference_n).
SequenceGenerator conformal_sequence(ConformalFactor phi, int reference_n);

struct SequenceRow {
    int n = 0;
    double min_energy = 0;
    double grad_norm = 0;
    MorphismStats stats;
    double minimizer_lp_dist = 0;

    // Not part of the CSV.
    double limit_energy = 0;    // minimum on M
    double recovery_energy = 0; // energy on M_n of the minimizer of M
    int iterations = 0;
    StopReason stop = StopReason::MaxIters;
};

struct SequenceResult {
    std::vector<SequenceRow> rows;
};

struct ExperimentOptions {
    // Start M_n from the previous minimizer (same connectivity) or the limit minimizer;
    // otherwise from initial_configuration.
    bool warm_start = true;
};

SequenceResult gamma_experiment(const SequenceGenerator &generator, const std::vector<int> &n_list,
                                const EnergySettings &settings, const SolveOptions &opts,
                                const ExperimentOptions &experiment = {});

////////////////////////////////////////////////////////////////////////////////
// Results CSV
////////////////////////////////////////////////////////////////////////////////
extern const char *const kResultsHeader;

void write_results(std::ostream &os, const SequenceResult &result);
void emit_results(const SequenceResult &result, const std::string &path);
// Reads the CSV columns back; the extra in-memory fields stay default.
SequenceResult read_results(std::istream &is);

} // namespace incompat
