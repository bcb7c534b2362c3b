// bodymesh v1 / bodyconf v1 text formats.
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "incompat/body.hpp"
#include "incompat/error.hpp"

namespace incompat {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream &is) : m_is(is) {}

    std::vector<std::string> tokens(const char *what) {
        std::string line;
        while (std::getline(m_is, line)) {
            ++m_line;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::istringstream ss(line);
            std::vector<std::string> out;
            for (std::string tok; ss >> tok;) out.push_back(tok);
            if (!out.empty()) return out;
        }
        fail(std::string("unexpected end of input, expected ") + what);
    }

    bool at_end() {
        std::string line;
        while (std::getline(m_is, line)) {
            ++m_line;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return false;
        }
        return true;
    }

    [[noreturn]] void fail(const std::string &msg) const {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(m_line) + ": " + msg);
    }

    double real(const std::string &tok) const {
        double x = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail("not a number: '" + tok + "'");
        if (!std::isfinite(x)) fail("non-finite number: '" + tok + "'");
        return x;
    }

    long long integer(const std::string &tok) const {
        long long x = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail("not an integer: '" + tok + "'");
        return x;
    }

    void expect(const std::vector<std::string> &toks, size_t n, const char *what) const {
        if (toks.size() != n) fail(std::string("malformed ") + what + " line");
    }

    long long header_count(const char *key) {
        const auto t = tokens(key);
        expect(t, 2, key);
        if (t[0] != key) fail(std::string("expected '") + key + "'");
        const long long n = integer(t[1]);
        if (n < 0) fail(std::string("negative ") + key + " count");
        return n;
    }

private:
    std::istream &m_is;
    int m_line = 0;
};

std::ofstream open_out(const std::string &path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    return is;
}

} // namespace

void write_bodymesh(std::ostream &os, const BodyMesh &mesh) {
    os << "bodymesh 1\n" << "V " << mesh.vertex_count() << "\n" << "T " << mesh.triangle_count() << "\n";
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto &tri = mesh.triangle(t);
        const auto &l = mesh.lengths(t);
        os << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << format_double(l[0]) << ' ' << format_double(l[1])
           << ' ' << format_double(l[2]) << '\n';
    }
}

BodyMesh read_bodymesh(std::istream &is) {
    LineReader in(is);
    const auto head = in.tokens("header");
    if (head.size() != 2 || head[0] != "bodymesh" || head[1] != "1") in.fail("expected 'bodymesh 1'");
    const long long nv = in.header_count("V");
    const long long nt = in.header_count("T");
    std::vector<Triangle> tris;
    std::vector<EdgeLengths> lengths;
    tris.reserve(nt);
    lengths.reserve(nt);
    for (long long t = 0; t < nt; ++t) {
        const auto tok = in.tokens("triangle");
        in.expect(tok, 6, "triangle");
        Triangle tri;
        for (int c = 0; c < 3; ++c) {
            const long long v = in.integer(tok[c]);
            if (v < 0 || v >= nv) in.fail("vertex index out of range");
            tri[c] = int(v);
        }
        tris.push_back(tri);
        lengths.push_back({in.real(tok[3]), in.real(tok[4]), in.real(tok[5])});
    }
    if (!in.at_end()) in.fail("more triangle lines than declared");
    return BodyMesh(int(nv), std::move(tris), std::move(lengths));
}

void write_bodyconf(std::ostream &os, const Configuration &u) {
    os << "bodyconf 1\n" << "V " << u.vertex_count() << "\n";
    for (int v = 0; v < u.vertex_count(); ++v)
        os << format_double(u.positions()(v, 0)) << ' ' << format_double(u.positions()(v, 1)) << '\n';
}

Configuration read_bodyconf(std::istream &is) {
    LineReader in(is);
    const auto head = in.tokens("header");
    if (head.size() != 2 || head[0] != "bodyconf" || head[1] != "1") in.fail("expected 'bodyconf 1'");
    const long long nv = in.header_count("V");
    Points P(nv, 2);
    for (long long v = 0; v < nv; ++v) {
        const auto tok = in.tokens("vertex");
        in.expect(tok, 2, "vertex");
        P(v, 0) = in.real(tok[0]);
        P(v, 1) = in.real(tok[1]);
    }
    if (!in.at_end()) in.fail("more vertex lines than declared");
    return Configuration(std::move(P));
}

void save_bodymesh(const std::string &path, const BodyMesh &mesh) {
    auto os = open_out(path);
    write_bodymesh(os, mesh);
    if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

BodyMesh load_bodymesh(const std::string &path) {
    auto is = open_in(path);
    return read_bodymesh(is);
}

void save_bodyconf(const std::string &path, const Configuration &u) {
    auto os = open_out(path);
    write_bodyconf(os, u);
    if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

Configuration load_bodyconf(const std::string &path) {
    auto is = open_in(path);
    return read_bodyconf(is);
}

} // namespace incompat
