#include "incompat/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "incompat/error.hpp"

namespace incompat {

namespace {

constexpr double kPi = std::numbers::pi;

// Collects triangles and fixes each edge's length the first time it is seen,
// so both sides of a shared edge carry the identical double.
class MeshAssembler {
public:
    explicit MeshAssembler(int vertex_count) : m_vertex_count(vertex_count) {}

    void add(int a, int b, int c, double lab, double lbc, double lca) {
        m_tris.push_back({a, b, c});
        m_lengths.push_back({canonical(a, b, lab), canonical(b, c, lbc), canonical(c, a, lca)});
    }

    void add(int a, int b, int c, const Vec2d &pa, const Vec2d &pb, const Vec2d &pc) {
        add(a, b, c, (pa - pb).norm(), (pb - pc).norm(), (pc - pa).norm());
    }

    BodyMesh build() { return BodyMesh(m_vertex_count, std::move(m_tris), std::move(m_lengths)); }

private:
    double canonical(int a, int b, double length) {
        const auto key = (std::uint64_t(std::min(a, b)) << 32) | std::uint64_t(std::max(a, b));
        return m_edge.try_emplace(key, length).first->second;
    }

    int m_vertex_count;
    std::vector<Triangle> m_tris;
    std::vector<EdgeLengths> m_lengths;
    std::unordered_map<std::uint64_t, double> m_edge;
};

// corners(i, j) returns the cell's corners (i,j), (i+1,j), (i+1,j+1), (i,j+1) in one flat chart.
template <class Corners>
BodyMesh build_grid(const GridTopology &grid, Corners &&corners) {
    MeshAssembler out((grid.nx + 1) * (grid.ny + 1));
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const std::array<Vec2d, 4> p = corners(i, j);
            const int v00 = grid.vertex(i, j), v10 = grid.vertex(i + 1, j);
            const int v11 = grid.vertex(i + 1, j + 1), v01 = grid.vertex(i, j + 1);
            out.add(v00, v10, v11, p[0], p[1], p[2]);
            out.add(v00, v11, v01, p[0], p[2], p[3]);
        }
    return out.build();
}

void require(bool ok, const std::string &msg) {
    if (!ok) throw Error(ErrorCode::BadParams, msg);
}

// Node positions 0 = x_0 < ... < x_m = length, first cell about `first`, each
// following cell at most `max_ratio` times the previous.
std::vector<double> graded_nodes(double length, double first, double max_ratio = 1.5) {
    if (first >= length) return {0.0, length};
    int m = 1;
    while (first * (std::pow(max_ratio, m) - 1) / (max_ratio - 1) < length) ++m;
    double q = 1;
    if (m * first < length) {
        double lo = 1, hi = max_ratio;
        for (int it = 0; it < 200; ++it) {
            q = 0.5 * (lo + hi);
            (first * (std::pow(q, m) - 1) / (q - 1) < length ? lo : hi) = q;
        }
        q = 0.5 * (lo + hi);
    }
    std::vector<double> x(m + 1, 0.0);
    double h = q == 1 ? length / m : length * (q - 1) / (std::pow(q, m) - 1);
    for (int k = 1; k <= m; ++k, h *= q) x[k] = x[k - 1] + h;
    x[m] = length;
    return x;
}

////////////////////////////////////////////////////////////////////////////////
// One dislocation block in its own charts
////////////////////////////////////////////////////////////////////////////////
//  Lower polygon: y in [0, lower_top(x)], upper polygon: y in [-rise(x), hU],
//  glued along their kinked edges.  Rows are parametrized by the fraction s
//  of the way from the glued path to the outer side.
struct BlockCharts {
    double w = 0, half = 0; // width, half height of the flat limit
    double hU = 0, hD = 0;  // heights of the two polygons on the left side
    std::vector<double> x, rise, s;
    int i_minus = 0, i_plus = 0;

    BlockCharts(double w_, double theta, double d, int refinement) : w(w_), half(0.5 * w_) {
        const double dc = d * std::cos(theta), ds = d * std::sin(theta);
        const double a = 0.5 * (w - dc);
        hU = hD = 0.5 * (w - ds);
        const double cell = dc / refinement;

        const auto side = graded_nodes(a, cell);
        for (auto it = side.rbegin(); it != side.rend(); ++it) {
            x.push_back(a - *it);
            rise.push_back(0);
        }
        x.front() = 0;
        i_minus = int(x.size()) - 1;
        for (int k = 1; k <= refinement; ++k) {
            x.push_back(a + dc * k / refinement);
            rise.push_back(ds * k / refinement);
        }
        i_plus = int(x.size()) - 1;
        for (size_t k = 1; k < side.size(); ++k) {
            x.push_back(a + dc + side[k]);
            rise.push_back(ds);
        }
        x.back() = w;

        s = graded_nodes(hU, cell);
        for (double &v : s) v /= hU;
        s.back() = 1;
    }

    int nx() const { return int(x.size()) - 1; }
    int path_row() const { return int(s.size()) - 1; }
    int ny() const { return 2 * path_row(); }

    // Node (i, j) in the chart of the polygon holding cell row `cell_j`.
    Vec2d chart(bool mirrored, int cell_j, int i, int j) const {
        const int k = mirrored ? nx() - i : i;
        const double X = mirrored ? w - x[k] : x[k];
        const int jp = path_row();
        if (cell_j < jp) {
            const double top = hD + rise[k];
            return {X, top * (1 - s[jp - j])};
        }
        const double bottom = -rise[k];
        return {X, bottom + s[j - jp] * (hU - bottom)};
    }

    Vec2d limit(bool mirrored, int i, int j) const {
        const int k = mirrored ? nx() - i : i;
        const double X = mirrored ? w - x[k] : x[k];
        const int jp = path_row();
        return {X, j <= jp ? half * (1 - s[jp - j]) : half + s[j - jp] * half};
    }
};

} // namespace

////////////////////////////////////////////////////////////////////////////////
// Grid loops
////////////////////////////////////////////////////////////////////////////////
std::vector<int> grid_ring_loop(const GridTopology &grid, int i0, int j0, int i1, int j1) {
    require(0 <= i0 && i0 < i1 && i1 < grid.nx && 0 <= j0 && j0 < j1 && j1 < grid.ny,
            "ring needs a cell rectangle of at least 2 x 2 inside the grid");
    std::vector<int> loop;
    const auto lo = [&](int i, int j) { loop.push_back(grid.lower_triangle(i, j)); };
    const auto up = [&](int i, int j) { loop.push_back(grid.upper_triangle(i, j)); };
    // Bottom row left to right, enters each cell through its left side.
    up(i0, j0), lo(i0, j0);
    for (int i = i0 + 1; i < i1; ++i) up(i, j0), lo(i, j0);
    up(i1, j0);
    // Right column upwards.
    for (int j = j0 + 1; j < j1; ++j) lo(i1, j), up(i1, j);
    lo(i1, j1), up(i1, j1);
    // Top row right to left.
    for (int i = i1 - 1; i > i0; --i) lo(i, j1), up(i, j1);
    lo(i0, j1);
    // Left column downwards.
    for (int j = j1 - 1; j > j0; --j) up(i0, j), lo(i0, j);
    return loop;
}

////////////////////////////////////////////////////////////////////////////////
// Flat patches and cones
////////////////////////////////////////////////////////////////////////////////
BodyMesh flat_square(int n, double side) {
    require(n >= 1, "flat_square needs n >= 1");
    require(side > 0 && std::isfinite(side), "flat_square needs a positive side");
    const double h = side / n, diag = side * std::sqrt(2.0) / n;
    const GridTopology grid{n, n};
    MeshAssembler out((n + 1) * (n + 1));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int v00 = grid.vertex(i, j), v10 = grid.vertex(i + 1, j);
            const int v11 = grid.vertex(i + 1, j + 1), v01 = grid.vertex(i, j + 1);
            out.add(v00, v10, v11, h, h, diag);
            out.add(v00, v11, v01, diag, h, h);
        }
    return out.build();
}

Configuration flat_square_layout(int n, double side) {
    require(n >= 1, "flat_square needs n >= 1");
    const GridTopology grid{n, n};
    Points P((n + 1) * (n + 1), 2);
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) P.row(grid.vertex(i, j)) << side * i / n, side * j / n;
    return Configuration(std::move(P));
}

namespace {

BodyMesh cone_like(double alpha, double r_max, int resolution) {
    require(resolution >= 8, "cone needs resolution >= 8");
    require(r_max > 0 && std::isfinite(r_max), "cone needs a positive radius");
    const int M = resolution, K = std::max(2, resolution / 4);
    const double dr = r_max / K, dphi = 2 * kPi / M, c = std::cos(alpha * dphi);
    const auto id = [M](int k, int j) { return k == 0 ? 0 : 1 + (k - 1) * M + (j % M); };
    const auto radius = [dr](int k) { return dr * k; };
    const auto arc = [&](int k) { return alpha * radius(k) * dphi; };
    const auto diag = [&](int k) {
        const double a = radius(k), b = radius(k + 1);
        return std::sqrt(a * a + b * b - 2 * a * b * c);
    };

    MeshAssembler out(1 + K * M);
    for (int j = 0; j < M; ++j) out.add(0, id(1, j), id(1, j + 1), dr, arc(1), dr);
    for (int k = 1; k < K; ++k)
        for (int j = 0; j < M; ++j) {
            const int p1 = id(k, j), p2 = id(k + 1, j), p3 = id(k + 1, j + 1), p4 = id(k, j + 1);
            out.add(p1, p2, p3, dr, arc(k + 1), diag(k));
            out.add(p1, p3, p4, diag(k), dr, arc(k));
        }
    return out.build();
}

} // namespace

BodyMesh cone_mesh(double alpha, double r_max, int resolution) {
    require(alpha > 0 && std::isfinite(alpha), "cone needs alpha > 0");
    require(std::abs(alpha - 1) > 1e-12, "cone needs alpha != 1; use flat_square or disc_mesh for the flat control");
    return cone_like(alpha, r_max, resolution);
}

BodyMesh disc_mesh(double r_max, int resolution) { return cone_like(1.0, r_max, resolution); }

Configuration cone_development(double alpha, double r_max, int resolution) {
    require(alpha > 0 && resolution >= 8 && r_max > 0, "bad cone parameters");
    const int M = resolution, K = std::max(2, resolution / 4);
    Points P(1 + K * M, 2);
    P.row(0).setZero();
    for (int k = 1; k <= K; ++k)
        for (int j = 0; j < M; ++j) {
            const double r = r_max * k / K, phi = alpha * 2 * kPi * j / M;
            P.row(1 + (k - 1) * M + j) << r * std::cos(phi), r * std::sin(phi);
        }
    return Configuration(std::move(P));
}

////////////////////////////////////////////////////////////////////////////////
// Dislocations
////////////////////////////////////////////////////////////////////////////////
void DislocationParams::validate() const {
    require(std::isfinite(theta) && theta > 0 && theta < kPi / 2, "theta must lie in (0, pi/2)");
    require(std::isfinite(d) && d > 0, "d must be positive");
    require(std::isfinite(block_size) && block_size > 0, "block_size must be positive");
    require(burgers_magnitude() < block_size, "2 d sin(theta) must be smaller than block_size");
    require(d * std::cos(theta) < block_size, "d cos(theta) must be smaller than block_size");
}

double DislocationParams::burgers_magnitude() const { return 2 * d * std::sin(theta); }

DislocationBlock dislocation_block(const DislocationParams &params, int refinement) {
    params.validate();
    require(refinement >= 1, "refinement must be positive");
    const BlockCharts charts(params.block_size, params.theta, params.d, refinement);
    DislocationBlock out;
    out.grid = {charts.nx(), charts.ny()};
    out.mesh = build_grid(out.grid, [&](int i, int j) {
        return std::array<Vec2d, 4>{charts.chart(false, j, i, j), charts.chart(false, j, i + 1, j),
                                    charts.chart(false, j, i + 1, j + 1), charts.chart(false, j, i, j + 1)};
    });
    out.p_minus = out.grid.vertex(charts.i_minus, charts.path_row());
    out.p_plus = out.grid.vertex(charts.i_plus, charts.path_row());
    out.dipole_loop = grid_ring_loop(out.grid, 0, 0, out.grid.nx - 1, out.grid.ny - 1);
    return out;
}

std::vector<int> DislocationLattice::block_loop(int c, int r) const {
    require(0 <= c && c < n && 0 <= r && r < n, "block index out of range");
    return grid_ring_loop(grid, c * block_nx, r * block_ny, (c + 1) * block_nx - 1, (r + 1) * block_ny - 1);
}

DislocationLattice dislocation_lattice(int n, LatticeRegime mode, double theta0, double epsilon, int refinement) {
    require(n >= 1, "lattice needs n >= 1");
    require(std::isfinite(theta0) && theta0 > 0 && theta0 <= kPi / 4, "theta0 must lie in (0, pi/4]");
    require(std::isfinite(epsilon) && epsilon > 0 && epsilon < 1, "epsilon must lie in (0, 1)");
    require(refinement >= 1, "refinement must be positive");

    DislocationLattice out;
    out.n = n;
    out.burgers_total = 2 * std::sin(theta0);
    out.theta = mode == LatticeRegime::Mean ? theta0 : theta0 * std::pow(double(n), -epsilon);
    out.d = out.burgers_total / (double(n) * n * 2 * std::sin(out.theta));
    const double w = 1.0 / n;
    DislocationParams{out.theta, out.d, w}.validate();

    const BlockCharts charts(w, out.theta, out.d, refinement);
    out.block_nx = charts.nx();
    out.block_ny = charts.ny();
    out.grid = {n * out.block_nx, n * out.block_ny};

    // Odd columns hold mirrored blocks: the tall right side of one block meets the tall left side of the next.
    const auto local = [&](int gi, int gj) {
        return std::array<int, 4>{gi / out.block_nx, gi % out.block_nx, gj / out.block_ny, gj % out.block_ny};
    };
    out.mesh = build_grid(out.grid, [&](int gi, int gj) {
        const auto [c, i, r, j] = local(gi, gj);
        const bool mirrored = c % 2 == 1;
        return std::array<Vec2d, 4>{charts.chart(mirrored, j, i, j), charts.chart(mirrored, j, i + 1, j),
                                    charts.chart(mirrored, j, i + 1, j + 1), charts.chart(mirrored, j, i, j + 1)};
    });

    Points P((out.grid.nx + 1) * (out.grid.ny + 1), 2);
    for (int gj = 0; gj <= out.grid.ny; ++gj)
        for (int gi = 0; gi <= out.grid.nx; ++gi) {
            // Nodes on a block's right or top side belong to the last local index of the block before.
            const int c = std::min(gi / out.block_nx, n - 1), r = std::min(gj / out.block_ny, n - 1);
            const int i = gi - c * out.block_nx, j = gj - r * out.block_ny;
            const Vec2d p = charts.limit(c % 2 == 1, i, j) + Vec2d(c * w, r * w);
            P.row(out.grid.vertex(gi, gj)) = p.transpose();
        }
    out.limit_layout = Configuration(std::move(P));
    const auto &L = out.limit_layout;
    out.limit = build_grid(out.grid, [&](int gi, int gj) {
        return std::array<Vec2d, 4>{L.position(out.grid.vertex(gi, gj)), L.position(out.grid.vertex(gi + 1, gj)),
                                    L.position(out.grid.vertex(gi + 1, gj + 1)),
                                    L.position(out.grid.vertex(gi, gj + 1))};
    });
    return out;
}

////////////////////////////////////////////////////////////////////////////////
// Conformal metrics
////////////////////////////////////////////////////////////////////////////////
double spherical_cap_factor(double x, double y) { return -std::log1p(0.25 * (x * x + y * y)); }

namespace {

double simpson_length(const ConformalFactor &phi, const Vec2d &a, const Vec2d &b, int panels) {
    const Vec2d d = b - a;
    const double h = 1.0 / panels;
    const auto f = [&](double t) {
        const Vec2d p = a + t * d;
        return std::exp(phi(p.x(), p.y()));
    };
    double sum = f(0) + f(1);
    for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4 : 2) * f(k * h);
    return sum * h / 3 * d.norm();
}

} // namespace

double conformal_length(const ConformalFactor &phi, const Vec2d &a, const Vec2d &b) {
    const double coarse = simpson_length(phi, a, b, 16), fine = simpson_length(phi, a, b, 32);
    return fine + (fine - coarse) / 15;
}

BodyMesh euclidean_triangulation(const ConformalFactor &phi, int n) {
    require(n >= 2, "euclidean_triangulation needs n >= 2");
    require(bool(phi), "conformal factor is empty");
    const GridTopology grid{n, n};
    const auto node = [n](int i, int j) { return Vec2d(double(i) / n, double(j) / n); };
    MeshAssembler out((n + 1) * (n + 1));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2d p00 = node(i, j), p10 = node(i + 1, j), p11 = node(i + 1, j + 1), p01 = node(i, j + 1);
            const double bottom = conformal_length(phi, p00, p10), right = conformal_length(phi, p10, p11);
            const double top = conformal_length(phi, p11, p01), left = conformal_length(phi, p01, p00);
            const double diag = conformal_length(phi, p00, p11);
            const int v00 = grid.vertex(i, j), v10 = grid.vertex(i + 1, j);
            const int v11 = grid.vertex(i + 1, j + 1), v01 = grid.vertex(i, j + 1);
            out.add(v00, v10, v11, bottom, right, diag);
            out.add(v00, v11, v01, diag, top, left);
        }
    return out.build();
}

BodyMesh euclidean_triangulation_refined(const ConformalFactor &phi, int n, int target_n) {
    require(target_n >= n && target_n % n == 0, "target grid must refine the base grid");
    const int f = target_n / n;
    require((f & (f - 1)) == 0, "refinement factor must be a power of two");
    const BodyMesh base = euclidean_triangulation(phi, n);
    if (f == 1) return base;
    const GridTopology coarse{n, n}, fine{target_n, target_n};

    // Sub-node (a, b) of parent cell (pi, pj), a, b in [0, f], in the chart of one parent triangle.
    const auto chart = [&](int pi, int pj, bool upper_half, int a, int b) {
        const int t = upper_half ? coarse.upper_triangle(pi, pj) : coarse.lower_triangle(pi, pj);
        const auto q = flatten_triangle(base.lengths(t));
        const double u = double(a) / f, v = double(b) / f;
        if (!upper_half) return Vec2d((1 - u) * q[0] + (u - v) * q[1] + v * q[2]);
        return Vec2d((1 - v) * q[0] + u * q[1] + (v - u) * q[2]);
    };
    MeshAssembler out((target_n + 1) * (target_n + 1));
    for (int J = 0; J < target_n; ++J)
        for (int I = 0; I < target_n; ++I) {
            const int pi = I / f, pj = J / f, a = I % f, b = J % f;
            // A sub-cell on the parent diagonal splits along it, so each half lies in one parent triangle.
            const bool lower_in_upper = b > a, upper_in_upper = b >= a;
            const int v00 = fine.vertex(I, J), v10 = fine.vertex(I + 1, J);
            const int v11 = fine.vertex(I + 1, J + 1), v01 = fine.vertex(I, J + 1);
            out.add(v00, v10, v11, chart(pi, pj, lower_in_upper, a, b), chart(pi, pj, lower_in_upper, a + 1, b),
                    chart(pi, pj, lower_in_upper, a + 1, b + 1));
            out.add(v00, v11, v01, chart(pi, pj, upper_in_upper, a, b), chart(pi, pj, upper_in_upper, a + 1, b + 1),
                    chart(pi, pj, upper_in_upper, a, b + 1));
        }
    return out.build();
}

double max_cone_defect(const BodyMesh &mesh) {
    double worst = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        if (!mesh.is_boundary_vertex(v)) worst = std::max(worst, std::abs(2 * kPi - cone_angle(mesh, v)));
    return worst;
}

////////////////////////////////////////////////////////////////////////////////
// Developing map
////////////////////////////////////////////////////////////////////////////////
namespace {

int shared_edge(const BodyMesh &mesh, int t, int next) {
    for (int e = 0; e < 3; ++e)
        if (mesh.neighbor(t, e) == next) return e;
    return -1;
}

// Places triangle `next` across the shared edge of the already placed triangle `t`.
std::array<Vec2d, 3> unfold(const BodyMesh &mesh, int t, const std::array<Vec2d, 3> &placed, int e, int next) {
    const Triangle &ta = mesh.triangle(t), &tb = mesh.triangle(next);
    const int A = ta[e], B = ta[(e + 1) % 3];
    const Vec2d pA = placed[e], pB = placed[(e + 1) % 3];
    const int c = int(std::find(tb.begin(), tb.end(), B) - tb.begin());
    if (tb[(c + 1) % 3] != A) throw Error(ErrorCode::NotAStrip, "inconsistent orientation across a strip edge");
    const auto q = flatten_triangle(mesh.lengths(next));
    const Vec2d src = (q[(c + 1) % 3] - q[c]).normalized(), dst = (pA - pB).normalized();
    Mat2d R;
    const double cs = src.dot(dst), sn = src.x() * dst.y() - src.y() * dst.x();
    R << cs, -sn, sn, cs;
    std::array<Vec2d, 3> out;
    for (int k = 0; k < 3; ++k) out[k] = pB + R * (q[k] - q[c]);
    out[c] = pB;
    out[(c + 1) % 3] = pA;
    return out;
}

} // namespace

Holonomy holonomy(const BodyMesh &mesh, std::span<const int> loop) {
    if (loop.empty()) throw Error(ErrorCode::NotAStrip, "empty loop");
    for (int t : loop)
        if (t < 0 || t >= mesh.triangle_count()) throw Error(ErrorCode::NotAStrip, "triangle index out of range");
    if (loop.size() < 2) throw Error(ErrorCode::NotClosed, "a single triangle does not form a closed strip");

    const auto first = flatten_triangle(mesh.lengths(loop[0]));
    auto placed = first;
    for (size_t k = 0; k + 1 < loop.size(); ++k) {
        const int e = shared_edge(mesh, loop[k], loop[k + 1]);
        if (e < 0)
            throw Error(ErrorCode::NotAStrip, "triangles " + std::to_string(loop[k]) + " and " +
                                                  std::to_string(loop[k + 1]) + " share no edge");
        placed = unfold(mesh, loop[k], placed, e, loop[k + 1]);
    }
    const int e = shared_edge(mesh, loop.back(), loop.front());
    if (e < 0) throw Error(ErrorCode::NotClosed, "last triangle is not adjacent to the first");
    const auto final_copy = unfold(mesh, loop.back(), placed, e, loop.front());

    // Motion first -> final copy, then inverted.
    const Vec2d a = (first[1] - first[0]).normalized(), b = (final_copy[1] - final_copy[0]).normalized();
    const double angle = std::atan2(a.x() * b.y() - a.y() * b.x(), a.dot(b));
    const Mat2d R = rotation(angle);
    const Vec2d shift = final_copy[0] - R * first[0];

    Holonomy h;
    h.rotation_angle = -angle;
    if (h.rotation_angle <= -kPi) h.rotation_angle += 2 * kPi;
    if (h.rotation_angle > kPi) h.rotation_angle -= 2 * kPi;
    h.translation = -(R.transpose() * shift);
    return h;
}

std::vector<int> vertex_loop(const BodyMesh &mesh, int v) {
    if (v < 0 || v >= mesh.vertex_count()) throw Error(ErrorCode::BadParams, "vertex index out of range");
    if (mesh.is_boundary_vertex(v))
        throw Error(ErrorCode::BoundaryVertex, "vertex " + std::to_string(v) + " lies on the boundary");
    const int start = mesh.vertex_triangles(v).front();
    std::vector<int> loop;
    int t = start;
    do {
        loop.push_back(t);
        const Triangle &tri = mesh.triangle(t);
        const int c = int(std::find(tri.begin(), tri.end(), v) - tri.begin());
        t = mesh.neighbor(t, (c + 2) % 3);
        if (loop.size() > mesh.vertex_triangles(v).size()) throw Error(ErrorCode::InvalidMesh, "vertex star is not a disc");
    } while (t != start);
    return loop;
}

} // namespace incompat
