// INI experiment configuration.  Sections and keys:
//
//   [experiment] generator = lattice | conformal, n_list = 2,4,8,16, seed, output, warm_start
//   [lattice]    regime = uniform | mean, theta0, epsilon, refinement
//   [conformal]  factor = spherical-cap | constant, value, reference_n
//   [energy]     p, dis_floor
//   [solver]     max_iters, grad_tol, armijo_c, backtrack, memory
//
// Unknown sections or keys and out-of-range values raise ParseError before
// anything is computed.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "incompat/solve.hpp"

namespace incompat {

struct ExperimentConfig {
    enum class Generator { Lattice, Conformal };

    Generator generator = Generator::Lattice;
    std::vector<int> n_list = {2, 4, 8, 16};
    std::uint64_t seed = 1;
    std::string output = "results.csv";
    bool warm_start = true;

    LatticeRegime regime = LatticeRegime::Uniform;
    double theta0 = 0.3;
    double epsilon = 0.6;
    int refinement = 2;

    std::string factor = "spherical-cap";
    double factor_value = 0;
    int reference_n = 64;

    EnergySettings energy;
    SolveOptions solver;

    SequenceGenerator make_generator() const;
    ExperimentOptions experiment_options() const { return {warm_start}; }
};

ExperimentConfig parse_config(std::istream &is);
ExperimentConfig load_config(const std::string &path);

} // namespace incompat
