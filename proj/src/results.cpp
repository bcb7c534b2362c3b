// Results CSV: one header line, one row per n, %.17g values, LF endings.
#include <charconv>
#include <fstream>
#include <sstream>

#include "incompat/error.hpp"
#include "incompat/solve.hpp"

namespace incompat {

const char *const kResultsHeader =
    "n,min_energy,grad_norm,sup_dis,mean_dis,mean_dis_inv,bilip,vol_ratio_dev,global_dis,minimizer_lp_dist";

void write_results(std::ostream &os, const SequenceResult &result) {
    os << kResultsHeader << '\n';
    for (const SequenceRow &r : result.rows) {
        const MorphismStats &s = r.stats;
        os << r.n;
        for (double x : {r.min_energy, r.grad_norm, s.sup_dis, s.mean_dis, s.mean_dis_inverse, s.bilip,
                         s.vol_ratio_dev, s.global_dis, r.minimizer_lp_dist})
            os << ',' << format_double(x);
        os << '\n';
    }
}

void emit_results(const SequenceResult &result, const std::string &path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_results(os, result);
    os.flush();
    if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

SequenceResult read_results(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != kResultsHeader)
        throw Error(ErrorCode::ParseError, "missing or malformed results header");
    SequenceResult out;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (cells.size() != 10)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 10 columns");
        const auto real = [&](const std::string &tok) {
            double x = 0;
            const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
            if (ec != std::errc() || p != tok.data() + tok.size())
                throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
            return x;
        };
        SequenceRow r;
        int n = 0;
        const auto [p, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), n);
        if (ec != std::errc() || p != cells[0].data() + cells[0].size())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad n '" + cells[0] + "'");
        r.n = n;
        r.min_energy = real(cells[1]);
        r.grad_norm = real(cells[2]);
        r.stats.sup_dis = real(cells[3]);
        r.stats.mean_dis = real(cells[4]);
        r.stats.mean_dis_inverse = real(cells[5]);
        r.stats.bilip = real(cells[6]);
        r.stats.vol_ratio_dev = real(cells[7]);
        r.stats.global_dis = real(cells[8]);
        r.minimizer_lp_dist = real(cells[9]);
        out.rows.push_back(r);
    }
    return out;
}

} // namespace incompat
