#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "incompat/body.hpp"
#include "incompat/config.hpp"
#include "incompat/solve.hpp"

using namespace incompat;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string &args) {
    const std::string cmd = std::string(INCOMPAT_CLI) + " " + args + " 2>&1";
    Run r;
    FILE *p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    for (size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("incompat-cli-" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string &name) const { return (path / name).string(); }
};

std::string slurp(const std::string &path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write(const std::string &path, const std::string &text) { std::ofstream(path) << text; }

ErrorCode config_error(const std::string &text) {
    std::istringstream is(text);
    try {
        parse_config(is);
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("config accepted: " << text);
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("config defaults and overrides") {
    std::istringstream empty("");
    const auto d = parse_config(empty);
    CHECK(d.generator == ExperimentConfig::Generator::Lattice);
    CHECK(d.n_list == std::vector<int>{2, 4, 8, 16});
    CHECK(d.regime == LatticeRegime::Uniform);

    std::istringstream is("[experiment]\ngenerator = conformal\nn_list = 8, 16\nseed = 42\nwarm_start = false\n"
                          "[conformal]\nreference_n = 32\n[energy]\np = 3\n[solver]\ngrad_tol = 1e-9\nmemory = 0\n");
    const auto c = parse_config(is);
    CHECK(c.generator == ExperimentConfig::Generator::Conformal);
    CHECK(c.n_list == std::vector<int>{8, 16});
    CHECK(c.seed == 42);
    CHECK(c.solver.seed == 42);
    CHECK_FALSE(c.warm_start);
    CHECK(c.reference_n == 32);
    CHECK(c.energy.p == 3);
    CHECK(c.solver.grad_tol == 1e-9);
    CHECK(c.solver.memory == 0);
}

TEST_CASE("config rejects unknown keys and out-of-range values") {
    CHECK(config_error("[experiment]\ncolour = red\n") == ErrorCode::ParseError);
    CHECK(config_error("[extras]\nx = 1\n") == ErrorCode::ParseError);
    CHECK(config_error("[experiment]\nn_list = 4,2\n") == ErrorCode::ParseError);
    CHECK(config_error("[experiment]\nn_list = 2,x\n") == ErrorCode::ParseError);
    CHECK(config_error("[experiment]\ngenerator = sphere\n") == ErrorCode::ParseError);
    CHECK(config_error("[lattice]\ntheta0 = 1.0\n") == ErrorCode::ParseError);
    CHECK(config_error("[lattice]\nepsilon = 1\n") == ErrorCode::ParseError);
    CHECK(config_error("[lattice]\nrefinement = 0\n") == ErrorCode::ParseError);
    CHECK(config_error("[energy]\np = 1.5\n") == ErrorCode::ParseError);
    CHECK(config_error("[energy]\np = abc\n") == ErrorCode::ParseError);
    CHECK(config_error("[solver]\narmijo_c = 2\n") == ErrorCode::ParseError);
    CHECK(config_error("[experiment]\ngenerator = conformal\nn_list = 3\n") == ErrorCode::ParseError);
    CHECK(config_error("[experiment]\nwarm_start = maybe\n") == ErrorCode::ParseError);
}

TEST_CASE("gen writes a flat square with 25 vertices and 32 triangles") {
    TempDir tmp;
    const auto r = run("gen --kind flat-square --n 4 --side 1 --out " + tmp / "m.bm");
    CHECK(r.status == 0);
    const auto m = load_bodymesh(tmp / "m.bm");
    CHECK(m.vertex_count() == 25);
    CHECK(m.triangle_count() == 32);
    CHECK(slurp(tmp / "m.bm").rfind("bodymesh 1\nV 25\nT 32\n", 0) == 0);
}

TEST_CASE("holonomy of the exported dipole loop") {
    TempDir tmp;
    CHECK(run("gen --kind dislocation-block --theta 0.3 --d 0.05 --out " + tmp / "block.bm" + " --loop-out " +
              tmp / "loop.txt")
              .status == 0);
    const auto r = run("holonomy --mesh " + tmp / "block.bm" + " --loop " + tmp / "loop.txt");
    REQUIRE(r.status == 0);
    const auto pos = r.out.find("magnitude ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::abs(std::stod(r.out.substr(pos + 10)) - 2 * 0.05 * std::sin(0.3)) < 1e-10);
}

TEST_CASE("energy and minimize round trip") {
    TempDir tmp;
    REQUIRE(run("gen --kind flat-square --n 3 --out " + tmp / "m.bm" + " --layout-out " + tmp / "u.bc").status == 0);
    auto r = run("energy --mesh " + tmp / "m.bm" + " --conf " + tmp / "u.bc");
    CHECK(r.status == 0);
    REQUIRE(r.out.rfind("total ", 0) == 0);
    CHECK(std::stod(r.out.substr(6)) < 1e-20);
    CHECK(r.out.find("grad_norm ") != std::string::npos);

    r = run("minimize --mesh " + tmp / "m.bm" + " --seed 3 --out " + tmp / "min.bc");
    CHECK(r.status == 0);
    CHECK(r.out.find("stop grad_tol") != std::string::npos);
    const auto m = load_bodymesh(tmp / "m.bm");
    CHECK(total_energy(m, load_bodyconf(tmp / "min.bc"), EnergySettings{}).total < 1e-10);
}

TEST_CASE("converge writes the results csv") {
    TempDir tmp;
    write(tmp / "c.cfg", "[experiment]\nn_list = 1,2\noutput = " + tmp / "out.csv" + "\n");
    const auto r = run("converge --config " + tmp / "c.cfg");
    CHECK(r.status == 0);
    const std::string csv = slurp(tmp / "out.csv");
    CHECK(csv.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    std::istringstream is(csv);
    CHECK(read_results(is).rows.size() == 2);

    CHECK(run("--threads 1 converge --config " + tmp / "c.cfg" + " --out " + tmp / "t1.csv").status == 0);
    CHECK(run("--threads 3 converge --config " + tmp / "c.cfg" + " --out " + tmp / "t3.csv").status == 0);
    CHECK(slurp(tmp / "t1.csv") == csv);
    CHECK(slurp(tmp / "t3.csv") == csv);
}

TEST_CASE("exit codes") {
    TempDir tmp;
    auto r = run("gen --kind hexagon --out " + tmp / "x.bm");
    CHECK(r.status == 2);
    CHECK(r.out.find("--kind") != std::string::npos);

    r = run("gen --kind flat-square");
    CHECK(r.status == 2);
    CHECK(r.out.find("--out") != std::string::npos);

    r = run("frobnicate");
    CHECK(r.status == 2);

    r = run("--threads 0 check --list");
    CHECK(r.status == 2);
    CHECK(r.out.find("--threads") != std::string::npos);

    r = run("gen --kind dislocation-block --theta 0.3 --d 5 --out " + tmp / "x.bm");
    CHECK(r.status == 1);
    CHECK(r.out.find("BadParams") != std::string::npos);

    write(tmp / "bad.bm", "bodymesh 1\nV 3\nT 1\n0 1 2 1 1 3\n");
    write(tmp / "loop.txt", "0\n");
    r = run("holonomy --mesh " + tmp / "bad.bm" + " --loop " + tmp / "loop.txt");
    CHECK(r.status == 1);
    CHECK(r.out.find("BadTriangle") != std::string::npos);

    r = run("energy --mesh " + tmp / "missing.bm" + " --conf " + tmp / "missing.bc");
    CHECK(r.status == 1);
    CHECK(r.out.find(tmp / "missing.bm") != std::string::npos);

    REQUIRE(run("gen --kind flat-square --n 2 --out " + tmp / "a.bm").status == 0);
    REQUIRE(run("gen --kind flat-square --n 3 --out " + tmp / "b.bm" + " --layout-out " + tmp / "b.bc").status == 0);
    r = run("energy --mesh " + tmp / "a.bm" + " --conf " + tmp / "b.bc");
    CHECK(r.status == 1);

    write(tmp / "bad.cfg", "[experiment]\nflavour = 1\n");
    r = run("converge --config " + tmp / "bad.cfg");
    CHECK(r.status == 2);
    CHECK(r.out.find("flavour") != std::string::npos);

    r = run("minimize --mesh " + tmp / "a.bm" + " --p 1.5 --out " + tmp / "o.bc");
    CHECK(r.status == 1);
    CHECK(r.out.find("NonDifferentiable") != std::string::npos);

    r = run("minimize --mesh " + tmp / "a.bm" + " --p 0.5 --out " + tmp / "o.bc");
    CHECK(r.status == 2);

    r = run("check --filter no-such-check");
    CHECK(r.status == 2);
}

TEST_CASE("check lists and runs named checks") {
    auto r = run("check --list");
    CHECK(r.status == 0);
    CHECK(r.out.find("energy.gradient_fd") != std::string::npos);
    r = run("check --filter linmap.isometry");
    CHECK(r.status == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
}
