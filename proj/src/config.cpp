#include "incompat/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "incompat/error.hpp"

namespace incompat {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void fail(const std::string &msg) { throw Error(ErrorCode::ParseError, "config: " + msg); }

const std::map<std::string, std::set<std::string>> kSchema = {
    {"experiment", {"generator", "n_list", "seed", "output", "warm_start"}},
    {"lattice", {"regime", "theta0", "epsilon", "refinement"}},
    {"conformal", {"factor", "value", "reference_n"}},
    {"energy", {"p", "dis_floor"}},
    {"solver", {"max_iters", "grad_tol", "armijo_c", "backtrack", "memory"}},
};

class Section {
public:
    Section(const pt::ptree &tree, std::string name) : m_name(std::move(name)) {
        if (auto child = tree.get_child_optional(m_name)) m_tree = &*child;
    }

    template <class T>
    void read(const char *key, T &out) const {
        if (!m_tree) return;
        const auto raw = m_tree->get_optional<std::string>(key);
        if (!raw) return;
        std::istringstream ss(*raw);
        T value{};
        if (!(ss >> value) || !(ss >> std::ws).eof()) fail(where(key) + " has invalid value '" + *raw + "'");
        out = value;
    }

    void read(const char *key, std::string &out) const {
        if (!m_tree) return;
        if (const auto raw = m_tree->get_optional<std::string>(key)) out = *raw;
    }

    void read(const char *key, bool &out) const {
        std::string raw;
        read(key, raw);
        if (raw.empty()) return;
        if (raw == "true" || raw == "1") out = true;
        else if (raw == "false" || raw == "0") out = false;
        else fail(where(key) + " must be true or false");
    }

    std::string where(const char *key) const { return "[" + m_name + "] " + key; }

private:
    std::string m_name;
    const pt::ptree *m_tree = nullptr;
};

std::vector<int> parse_n_list(const std::string &raw) {
    std::vector<int> out;
    std::stringstream ss(raw);
    for (std::string item; std::getline(ss, item, ',');) {
        std::istringstream is(item);
        int n = 0;
        if (!(is >> n) || !(is >> std::ws).eof()) fail("n_list entry '" + item + "' is not an integer");
        out.push_back(n);
    }
    return out;
}

void check(bool ok, const std::string &msg) {
    if (!ok) fail(msg);
}

} // namespace

ExperimentConfig parse_config(std::istream &is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error &e) {
        fail(e.message() + " at line " + std::to_string(e.line()));
    }
    for (const auto &[section, body] : tree) {
        const auto it = kSchema.find(section);
        if (it == kSchema.end()) {
            if (body.empty()) fail("key '" + section + "' outside any section");
            fail("unknown section [" + section + "]");
        }
        for (const auto &[key, value] : body)
            if (!it->second.count(key)) fail("unknown key '" + key + "' in [" + section + "]");
    }

    ExperimentConfig c;
    const Section ex(tree, "experiment"), la(tree, "lattice"), co(tree, "conformal"), en(tree, "energy"),
        so(tree, "solver");

    std::string generator = "lattice", n_list, regime = "uniform";
    ex.read("generator", generator);
    ex.read("n_list", n_list);
    ex.read("seed", c.seed);
    ex.read("output", c.output);
    ex.read("warm_start", c.warm_start);
    la.read("regime", regime);
    la.read("theta0", c.theta0);
    la.read("epsilon", c.epsilon);
    la.read("refinement", c.refinement);
    co.read("factor", c.factor);
    co.read("value", c.factor_value);
    co.read("reference_n", c.reference_n);
    en.read("p", c.energy.p);
    en.read("dis_floor", c.energy.dis_floor);
    so.read("max_iters", c.solver.max_iters);
    so.read("grad_tol", c.solver.grad_tol);
    so.read("armijo_c", c.solver.armijo_c);
    so.read("backtrack", c.solver.backtrack);
    so.read("memory", c.solver.memory);
    c.solver.seed = c.seed;

    if (generator == "lattice") c.generator = ExperimentConfig::Generator::Lattice;
    else if (generator == "conformal") c.generator = ExperimentConfig::Generator::Conformal;
    else fail("[experiment] generator must be lattice or conformal");
    if (regime == "uniform") c.regime = LatticeRegime::Uniform;
    else if (regime == "mean") c.regime = LatticeRegime::Mean;
    else fail("[lattice] regime must be uniform or mean");
    if (!n_list.empty()) c.n_list = parse_n_list(n_list);

    check(!c.n_list.empty(), "[experiment] n_list is empty");
    for (size_t k = 0; k < c.n_list.size(); ++k) {
        check(c.n_list[k] >= 1, "[experiment] n_list entries must be positive");
        check(k == 0 || c.n_list[k] > c.n_list[k - 1], "[experiment] n_list must be strictly increasing");
    }
    check(!c.output.empty(), "[experiment] output is empty");
    check(std::isfinite(c.theta0) && c.theta0 > 0 && c.theta0 <= std::numbers::pi / 4, "[lattice] theta0 must lie in (0, pi/4]");
    check(std::isfinite(c.epsilon) && c.epsilon > 0 && c.epsilon < 1, "[lattice] epsilon must lie in (0, 1)");
    check(c.refinement >= 1, "[lattice] refinement must be positive");
    check(c.factor == "spherical-cap" || c.factor == "constant", "[conformal] factor must be spherical-cap or constant");
    check(std::isfinite(c.factor_value), "[conformal] value must be finite");
    if (c.generator == ExperimentConfig::Generator::Conformal) {
        check(c.reference_n >= 2, "[conformal] reference_n must be >= 2");
        for (int n : c.n_list) {
            const int f = n >= 2 && c.reference_n % n == 0 ? c.reference_n / n : 0;
            check(f >= 1 && (f & (f - 1)) == 0, "[conformal] every n must be at least 2 and divide reference_n by a power of two");
        }
    }
    try {
        c.energy.validate();
        c.solver.validate();
    } catch (const Error &e) {
        fail(e.what());
    }
    check(c.energy.p >= 2, "[energy] the solver needs p >= 2");
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    return parse_config(is);
}

SequenceGenerator ExperimentConfig::make_generator() const {
    if (generator == Generator::Lattice) return lattice_sequence(regime, theta0, epsilon, refinement);
    if (factor == "constant") {
        const double value = factor_value;
        return conformal_sequence([value](double, double) { return value; }, reference_n);
    }
    return conformal_sequence(spherical_cap_factor, reference_n);
}

} // namespace incompat
