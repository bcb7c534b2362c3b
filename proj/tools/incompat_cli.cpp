// Command-line front end: gen | energy | minimize | converge | holonomy | check.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "incompat/body.hpp"
#include "incompat/checks.hpp"
#include "incompat/config.hpp"
#include "incompat/constructions.hpp"
#include "incompat/energy.hpp"
#include "incompat/error.hpp"
#include "incompat/parallel.hpp"
#include "incompat/solve.hpp"

using namespace incompat;

namespace {

// Thrown for bad flag combinations that CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<int> read_loop(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::vector<int> loop;
    std::string line;
    for (int lineno = 1; std::getline(is, line); ++lineno) {
        std::istringstream ss(line);
        int t;
        if (!(ss >> t)) {
            if ((ss.clear(), ss >> std::ws).eof()) continue;
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected a triangle index");
        }
        if (!(ss >> std::ws).eof())
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": trailing characters");
        loop.push_back(t);
    }
    return loop;
}

void write_loop(const std::string &path, const std::vector<int> &loop) {
    std::ofstream os(path);
    for (int t : loop) os << t << '\n';
    if (!os) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
}

struct GenArgs {
    std::string kind, out, loop_out, limit_out, layout_out;
    int n = 4, resolution = 16, refinement = 2, target_n = 0;
    double side = 1, alpha = 1, r_max = 1;
    double theta = 0.3, d = 0.05, block_size = 1;
    std::string regime = "uniform";
    double theta0 = 0.3, epsilon = 0.6;
};

int run_gen(const GenArgs &a) {
    BodyMesh mesh;
    if (a.kind == "flat-square") {
        mesh = flat_square(a.n, a.side);
        if (!a.layout_out.empty()) save_bodyconf(a.layout_out, flat_square_layout(a.n, a.side));
    } else if (a.kind == "cone") {
        mesh = cone_mesh(a.alpha, a.r_max, a.resolution);
        if (!a.layout_out.empty()) save_bodyconf(a.layout_out, cone_development(a.alpha, a.r_max, a.resolution));
    } else if (a.kind == "disc") {
        mesh = disc_mesh(a.r_max, a.resolution);
    } else if (a.kind == "dislocation-block") {
        const auto block = dislocation_block({a.theta, a.d, a.block_size}, a.refinement);
        mesh = block.mesh;
        if (!a.loop_out.empty()) write_loop(a.loop_out, block.dipole_loop);
        std::printf("p_minus %d\np_plus %d\n", block.p_minus, block.p_plus);
    } else if (a.kind == "lattice") {
        const LatticeRegime mode = a.regime == "mean" ? LatticeRegime::Mean : LatticeRegime::Uniform;
        const auto lat = dislocation_lattice(a.n, mode, a.theta0, a.epsilon, a.refinement);
        mesh = lat.mesh;
        if (!a.limit_out.empty()) save_bodymesh(a.limit_out, lat.limit);
        if (!a.layout_out.empty()) save_bodyconf(a.layout_out, lat.limit_layout);
        if (!a.loop_out.empty()) write_loop(a.loop_out, lat.block_loop(0, 0));
        std::printf("theta %s\nd %s\n", format_double(lat.theta).c_str(), format_double(lat.d).c_str());
    } else if (a.kind == "conformal") {
        mesh = a.target_n > 0 ? euclidean_triangulation_refined(spherical_cap_factor, a.n, a.target_n)
                              : euclidean_triangulation(spherical_cap_factor, a.n);
        std::printf("max_cone_defect %s\n", format_double(max_cone_defect(mesh)).c_str());
    }
    save_bodymesh(a.out, mesh);
    std::printf("vertices %d\ntriangles %d\n", mesh.vertex_count(), mesh.triangle_count());
    return 0;
}

int run_energy(const std::string &mesh_path, const std::string &conf_path, const EnergySettings &s) {
    const BodyMesh mesh = load_bodymesh(mesh_path);
    const Configuration u = load_bodyconf(conf_path);
    const auto r = total_energy(mesh, u, s);
    std::printf("total %s\ngrad_norm %s\n", format_double(r.total).c_str(), format_double(r.grad_norm).c_str());
    return 0;
}

int run_minimize(const std::string &mesh_path, const std::string &start, const std::string &out, const EnergySettings &s,
                 const SolveOptions &o) {
    const BodyMesh mesh = load_bodymesh(mesh_path);
    const Configuration u0 = start.empty() ? initial_configuration(mesh, o.seed) : load_bodyconf(start);
    const auto r = minimize(mesh, u0, s, o);
    save_bodyconf(out, r.u);
    std::printf("energy %s grad_norm %s iterations %d stop %s\n", format_double(r.report.total).c_str(),
                format_double(r.report.grad_norm).c_str(), r.iterations, to_string(r.stop).c_str());
    return 0;
}

int run_converge(const std::string &config_path, const std::string &out_override) {
    ExperimentConfig c;
    try {
        c = load_config(config_path);
    } catch (const Error &e) {
        if (e.code() == ErrorCode::ParseError) throw UsageError(std::string("--config: ") + e.what());
        throw;
    }
    const std::string out = out_override.empty() ? c.output : out_override;
    const auto result = gamma_experiment(c.make_generator(), c.n_list, c.energy, c.solver, c.experiment_options());
    emit_results(result, out);
    for (const auto &row : result.rows)
        std::printf("n %d min_energy %.6g sup_dis %.4g mean_dis %.4g lp_dist %.4g iterations %d stop %s\n", row.n,
                    row.min_energy, row.stats.sup_dis, row.stats.mean_dis, row.minimizer_lp_dist, row.iterations,
                    to_string(row.stop).c_str());
    std::vector<MorphismStats> stats;
    for (const auto &row : result.rows) stats.push_back(row.stats);
    std::printf("convergence %s\nwrote %s\n", to_string(classify_convergence(stats)).c_str(), out.c_str());
    return 0;
}

int run_holonomy(const std::string &mesh_path, const std::string &loop_path) {
    const BodyMesh mesh = load_bodymesh(mesh_path);
    const auto h = holonomy(mesh, read_loop(loop_path));
    std::printf("rotation_angle %s\ntranslation %s %s\nmagnitude %s\n", format_double(h.rotation_angle).c_str(),
                format_double(h.translation.x()).c_str(), format_double(h.translation.y()).c_str(),
                format_double(h.translation.norm()).c_str());
    return 0;
}

int run_check(const std::string &filter, bool list, bool strict) {
    if (list) {
        for (const auto &c : list_checks()) std::printf("%-42s %s\n", c.name.c_str(), c.description.c_str());
        return 0;
    }
    int failed = 0, known = 0, total = 0;
    run_checks(filter, [&](const CheckResult &r) {
        const char *tag = r.passed ? "PASS" : r.known_failure ? "FAIL (known)" : "FAIL";
        std::printf("%-12s %-42s %7.2fs  %s\n", tag, r.name.c_str(), r.seconds, r.detail.c_str());
        std::fflush(stdout);
        ++total;
        if (!r.passed) ++(r.known_failure ? known : failed);
    });
    if (total == 0) throw UsageError("--filter: no check matches '" + filter + "'");
    std::printf("%d checks, %d passed, %d failed, %d known failures\n", total, total - failed - known, failed, known);
    return failed > 0 || (strict && known > 0) ? 1 : 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Incompatible elasticity on intrinsic triangulated bodies"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: available parallelism)")->check(CLI::PositiveNumber);

    EnergySettings energy;
    SolveOptions solver;
    auto add_energy = [&](CLI::App *sub) {
        sub->add_option("--p", energy.p, "energy exponent")->capture_default_str();
        sub->add_option("--dis-floor", energy.dis_floor)->capture_default_str();
    };

    GenArgs gen;
    auto *g = app.add_subcommand("gen", "generate a bodymesh");
    g->add_option("--kind", gen.kind)
        ->required()
        ->check(CLI::IsMember({"flat-square", "cone", "disc", "dislocation-block", "lattice", "conformal"}));
    g->add_option("--out", gen.out, "output bodymesh")->required();
    g->add_option("--n", gen.n, "grid cells / lattice blocks per side")->capture_default_str();
    g->add_option("--side", gen.side)->capture_default_str();
    g->add_option("--alpha", gen.alpha, "cone angle factor")->capture_default_str();
    g->add_option("--r-max", gen.r_max)->capture_default_str();
    g->add_option("--resolution", gen.resolution)->capture_default_str();
    g->add_option("--theta", gen.theta)->capture_default_str();
    g->add_option("--d", gen.d)->capture_default_str();
    g->add_option("--block-size", gen.block_size)->capture_default_str();
    g->add_option("--refinement", gen.refinement)->capture_default_str();
    g->add_option("--regime", gen.regime)->check(CLI::IsMember({"uniform", "mean"}))->capture_default_str();
    g->add_option("--theta0", gen.theta0)->capture_default_str();
    g->add_option("--epsilon", gen.epsilon)->capture_default_str();
    g->add_option("--target-n", gen.target_n, "conformal: carry onto this finer grid");
    g->add_option("--loop-out", gen.loop_out, "write the dipole (or first block) loop");
    g->add_option("--limit-out", gen.limit_out, "lattice: write the flat limit mesh");
    g->add_option("--layout-out", gen.layout_out, "write an isometric layout as bodyconf");

    std::string mesh_path, conf_path, out_path, loop_path, config_path, filter;
    bool list = false, strict = false;

    auto *e = app.add_subcommand("energy", "evaluate the elastic energy of a configuration");
    e->add_option("--mesh", mesh_path)->required();
    e->add_option("--conf", conf_path)->required();
    add_energy(e);

    auto *m = app.add_subcommand("minimize", "minimize the elastic energy");
    m->add_option("--mesh", mesh_path)->required();
    m->add_option("--start", conf_path, "initial bodyconf (default: seeded Tutte layout)");
    m->add_option("--out", out_path)->required();
    m->add_option("--seed", solver.seed)->capture_default_str();
    m->add_option("--max-iters", solver.max_iters)->capture_default_str();
    m->add_option("--grad-tol", solver.grad_tol)->capture_default_str();
    m->add_option("--memory", solver.memory)->capture_default_str();
    add_energy(m);

    auto *c = app.add_subcommand("converge", "run a sequence experiment and write the results CSV");
    c->add_option("--config", config_path)->required();
    c->add_option("--out", out_path, "override [experiment] output");

    auto *h = app.add_subcommand("holonomy", "holonomy of a closed triangle strip");
    h->add_option("--mesh", mesh_path)->required();
    h->add_option("--loop", loop_path, "one triangle index per line")->required();

    auto *k = app.add_subcommand("check", "run the invariant/property suite");
    k->add_option("--filter", filter, "substring of check names");
    k->add_flag("--list", list);
    k->add_flag("--strict", strict, "also fail on known failures");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp &ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError &ex) {
        app.exit(ex);
        return 2;
    }

    if (threads > 0) set_thread_count(threads);
    try {
        try {
            if (*m || *e) energy.validate();
            if (*m) solver.validate();
        } catch (const Error &ex) {
            throw UsageError(std::string("energy/solver flags: ") + ex.what());
        }
        if (*g) return run_gen(gen);
        if (*e) return run_energy(mesh_path, conf_path, energy);
        if (*m) return run_minimize(mesh_path, conf_path, out_path, energy, solver);
        if (*c) return run_converge(config_path, out_path);
        if (*h) return run_holonomy(mesh_path, loop_path);
        return run_check(filter, list, strict);
    } catch (const UsageError &ex) {
        std::fprintf(stderr, "usage error: %s\n", ex.what());
        return 2;
    } catch (const Error &ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
}
