#include "incompat/body.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <queue>

#include "incompat/error.hpp"
#include "incompat/parallel.hpp"

namespace incompat {

////////////////////////////////////////////////////////////////////////////////
// Triangle geometry
////////////////////////////////////////////////////////////////////////////////
bool satisfies_triangle_inequality(const EdgeLengths &l) {
    for (double x : l)
        if (!(x > 0) || !std::isfinite(x)) return false;
    return l[0] < l[1] + l[2] && l[1] < l[2] + l[0] && l[2] < l[0] + l[1];
}

std::array<Vec2d, 3> flatten_triangle(const EdgeLengths &l) {
    if (!satisfies_triangle_inequality(l))
        throw Error(ErrorCode::BadTriangle, "lengths (" + format_double(l[0]) + ", " + format_double(l[1]) + ", " +
                                                format_double(l[2]) + ") violate the strict triangle inequality");
    const double l01 = l[0], l12 = l[1], l20 = l[2];
    const double x = (l01 * l01 + l20 * l20 - l12 * l12) / (2 * l01);
    const double y = 2 * heron_area(l) / l01;
    return {Vec2d(0, 0), Vec2d(l01, 0), Vec2d(x, y)};
}

// Kahan's numerically stable form of Heron's rule.
double heron_area(const EdgeLengths &l) {
    std::array<double, 3> s = l;
    std::sort(s.begin(), s.end(), std::greater<>());
    const double a = s[0], b = s[1], c = s[2];
    const double p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    return 0.25 * std::sqrt(std::max(0.0, p));
}

double corner_angle(const EdgeLengths &l, int c) {
    // Corner c sits between edges c (c -> c+1) and c+2 (c+2 -> c); the opposite edge is c+1.
    const double a = l[c], b = l[(c + 2) % 3], opp = l[(c + 1) % 3];
    // atan2 of (2 Area, a^2 + b^2 - opp^2) stays accurate for very flat or very sharp corners.
    return std::atan2(4 * heron_area(l), a * a + b * b - opp * opp);
}

double triangle_area(const BodyMesh &mesh, int t) { return mesh.area(t); }

double cone_angle(const BodyMesh &mesh, int v) {
    if (v < 0 || v >= mesh.vertex_count()) throw Error(ErrorCode::BadParams, "vertex index out of range");
    if (mesh.is_boundary_vertex(v))
        throw Error(ErrorCode::BoundaryVertex, "vertex " + std::to_string(v) + " lies on the boundary");
    double sum = 0;
    for (int t : mesh.vertex_triangles(v)) {
        const Triangle &tri = mesh.triangle(t);
        const int c = int(std::find(tri.begin(), tri.end(), v) - tri.begin());
        sum += corner_angle(mesh.lengths(t), c);
    }
    return sum;
}

////////////////////////////////////////////////////////////////////////////////
// BodyMesh
////////////////////////////////////////////////////////////////////////////////
BodyMesh::BodyMesh(int vertex_count, std::vector<Triangle> triangles, std::vector<EdgeLengths> lengths)
    : m_vertex_count(vertex_count), m_triangles(std::move(triangles)), m_lengths(std::move(lengths)) {
    if (vertex_count <= 0) throw Error(ErrorCode::InvalidMesh, "vertex count must be positive");
    if (m_triangles.empty()) throw Error(ErrorCode::InvalidMesh, "mesh has no triangles");
    if (m_triangles.size() != m_lengths.size())
        throw Error(ErrorCode::InvalidMesh, "one length triple is required per triangle");

    const int nt = triangle_count();
    m_area.resize(nt);
    m_ref_inverse.resize(nt);
    m_vertex_tris.assign(vertex_count, {});
    m_neighbors.assign(nt, {-1, -1, -1});

    // Directed half-edge (a -> b) to (triangle, local edge).
    std::map<std::pair<int, int>, std::pair<int, int>> halfedges;
    for (int t = 0; t < nt; ++t) {
        const Triangle &tri = m_triangles[t];
        for (int c = 0; c < 3; ++c) {
            if (tri[c] < 0 || tri[c] >= vertex_count)
                throw Error(ErrorCode::InvalidMesh, "triangle " + std::to_string(t) + " has an out-of-range vertex");
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[2] == tri[0])
            throw Error(ErrorCode::InvalidMesh, "triangle " + std::to_string(t) + " repeats a vertex");

        const auto q = flatten_triangle(m_lengths[t]); // BadTriangle
        Mat2d D;
        D << q[1] - q[0], q[2] - q[0];
        m_ref_inverse[t] = D.inverse();
        m_area[t] = heron_area(m_lengths[t]);

        for (int c = 0; c < 3; ++c) {
            m_vertex_tris[tri[c]].push_back(t);
            const auto key = std::make_pair(tri[c], tri[(c + 1) % 3]);
            if (!halfedges.emplace(key, std::make_pair(t, c)).second)
                throw Error(ErrorCode::InvalidMesh, "edge (" + std::to_string(key.first) + ", " +
                                                        std::to_string(key.second) +
                                                        ") is traversed twice in the same direction");
        }
    }

    m_boundary.assign(vertex_count, 0);
    for (const auto &[key, te] : halfedges) {
        const auto [a, b] = key;
        const auto [t, c] = te;
        auto twin = halfedges.find({b, a});
        if (twin == halfedges.end()) {
            m_boundary[a] = m_boundary[b] = 1;
            m_edges.push_back({std::min(a, b), std::max(a, b), m_lengths[t][c]});
            continue;
        }
        const auto [t2, c2] = twin->second;
        m_neighbors[t][c] = t2;
        if (a < b) {
            if (m_lengths[t][c] != m_lengths[t2][c2])
                throw Error(ErrorCode::InvalidMesh, "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                                                        ") has different lengths in its two triangles");
            m_edges.push_back({a, b, m_lengths[t][c]});
        }
    }
    std::sort(m_edges.begin(), m_edges.end(), [](const Edge &x, const Edge &y) {
        return std::tie(x.a, x.b) < std::tie(y.a, y.b);
    });

    for (int v = 0; v < vertex_count; ++v)
        if (m_vertex_tris[v].empty())
            throw Error(ErrorCode::InvalidMesh, "vertex " + std::to_string(v) + " belongs to no triangle");

    // Connectivity of the triangle adjacency graph.
    std::vector<char> seen(nt, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        for (int n : m_neighbors[t])
            if (n >= 0 && !seen[n]) {
                seen[n] = 1;
                ++reached;
                stack.push_back(n);
            }
    }
    if (reached != nt) throw Error(ErrorCode::InvalidMesh, "triangle adjacency graph is disconnected");
}

double BodyMesh::total_area() const {
    double sum = 0;
    for (double a : m_area) sum += a;
    return sum;
}

bool BodyMesh::has_boundary() const {
    return std::any_of(m_boundary.begin(), m_boundary.end(), [](char b) { return b != 0; });
}

std::vector<int> BodyMesh::boundary_loop() const {
    // Boundary half-edges a -> b (interior on the left).
    std::map<int, int> next;
    int count = 0;
    for (int t = 0; t < triangle_count(); ++t)
        for (int c = 0; c < 3; ++c)
            if (m_neighbors[t][c] < 0) {
                const int a = m_triangles[t][c], b = m_triangles[t][(c + 1) % 3];
                if (!next.emplace(a, b).second)
                    throw Error(ErrorCode::InvalidMesh, "boundary is not a simple loop (pinched vertex " +
                                                            std::to_string(a) + ")");
                ++count;
            }
    if (count == 0) throw Error(ErrorCode::ClosedSurface, "mesh has no boundary");
    std::vector<int> loop;
    int v = next.begin()->first;
    do {
        loop.push_back(v);
        v = next.at(v);
    } while (v != loop.front() && int(loop.size()) <= count);
    if (int(loop.size()) != count)
        throw Error(ErrorCode::InvalidMesh, "boundary consists of more than one loop");
    return loop;
}

BodyMesh BodyMesh::with_lengths(std::vector<EdgeLengths> lengths) const {
    return BodyMesh(m_vertex_count, m_triangles, std::move(lengths));
}

BodyMesh BodyMesh::scaled(double factor) const {
    std::vector<EdgeLengths> l = m_lengths;
    for (auto &tri : l)
        for (double &x : tri) x *= factor;
    return with_lengths(std::move(l));
}

////////////////////////////////////////////////////////////////////////////////
// Configurations
////////////////////////////////////////////////////////////////////////////////
Configuration::Configuration(Points positions) : m_positions(std::move(positions)) {
    if (!m_positions.allFinite()) throw Error(ErrorCode::BadParams, "configuration has non-finite coordinates");
}

LinMap2d deformation_gradient(const BodyMesh &mesh, const Configuration &u, int t) {
    if (u.vertex_count() != mesh.vertex_count())
        throw Error(ErrorCode::BadParams, "configuration size does not match the mesh");
    const Triangle &tri = mesh.triangle(t);
    Mat2d D;
    D << u.position(tri[1]) - u.position(tri[0]), u.position(tri[2]) - u.position(tri[0]);
    return LinMap2d(D * mesh.reference_inverse(t));
}

Configuration develop(const BodyMesh &mesh) {
    const int nv = mesh.vertex_count(), nt = mesh.triangle_count();
    Points P = Points::Zero(nv, 2);
    std::vector<char> placed(nv, 0), visited(nt, 0);
    const auto q = flatten_triangle(mesh.lengths(0));
    for (int c = 0; c < 3; ++c) {
        P.row(mesh.triangle(0)[c]) = q[c].transpose();
        placed[mesh.triangle(0)[c]] = 1;
    }
    std::queue<int> queue;
    queue.push(0);
    visited[0] = 1;
    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop();
        for (int e = 0; e < 3; ++e) {
            const int n = mesh.neighbor(t, e);
            if (n < 0 || visited[n]) continue;
            visited[n] = 1;
            // Place n by the rigid motion taking its shared edge onto the already placed one.
            const Triangle &tn = mesh.triangle(n);
            const auto qn = flatten_triangle(mesh.lengths(n));
            const int a = mesh.triangle(t)[e], b = mesh.triangle(t)[(e + 1) % 3];
            const int ca = int(std::find(tn.begin(), tn.end(), a) - tn.begin());
            const int cb = int(std::find(tn.begin(), tn.end(), b) - tn.begin());
            const Vec2d pa = P.row(a).transpose(), pb = P.row(b).transpose();
            const Vec2d da = qn[cb] - qn[ca], dp = pb - pa;
            const double rot = std::atan2(dp.y(), dp.x()) - std::atan2(da.y(), da.x());
            const Mat2d R = rotation(rot);
            for (int c = 0; c < 3; ++c) {
                if (placed[tn[c]]) continue;
                P.row(tn[c]) = (pa + R * (qn[c] - qn[ca])).transpose();
                placed[tn[c]] = 1;
            }
            queue.push(n);
        }
    }
    return Configuration(std::move(P));
}

////////////////////////////////////////////////////////////////////////////////
// Morphism statistics
////////////////////////////////////////////////////////////////////////////////
std::vector<double> graph_distances(const BodyMesh &mesh, int source) {
    const int nv = mesh.vertex_count();
    std::vector<std::vector<std::pair<int, double>>> adj(nv);
    for (const Edge &e : mesh.edges()) {
        adj[e.a].emplace_back(e.b, e.length);
        adj[e.b].emplace_back(e.a, e.length);
    }
    std::vector<double> dist(nv, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (const auto &[w, l] : adj[v])
            if (d + l < dist[w]) {
                dist[w] = d + l;
                heap.emplace(dist[w], w);
            }
    }
    return dist;
}

std::vector<int> distance_sources(const BodyMesh &mesh) {
    const int nv = mesh.vertex_count();
    std::vector<int> sources;
    if (nv <= 1500) {
        for (int v = 0; v < nv; ++v) sources.push_back(v);
        return sources;
    }
    constexpr int kSamples = 64;
    for (int k = 0; k < kSamples; ++k) sources.push_back(int((long long)k * (nv - 1) / (kSamples - 1)));
    return sources;
}

double graph_diameter(const BodyMesh &mesh) {
    const auto sources = distance_sources(mesh);
    std::vector<double> best(sources.size(), 0.0);
    parallel_for(int(sources.size()), [&](int b, int e) {
        for (int i = b; i < e; ++i) {
            const auto d = graph_distances(mesh, sources[i]);
            best[i] = *std::max_element(d.begin(), d.end());
        }
    }, 1);
    return *std::max_element(best.begin(), best.end());
}

MorphismStats morphism_stats(const BodyMesh &source, const BodyMesh &target) {
    if (!source.same_connectivity(target))
        throw Error(ErrorCode::ConnectivityMismatch, "source and target meshes have different triangle lists");

    const int nt = source.triangle_count();
    struct PerTriangle { double dis, dis_inv, bilip, vol; };
    std::vector<PerTriangle> per(nt);
    parallel_for(nt, [&](int b, int e) {
        for (int t = b; t < e; ++t) {
            if (source.lengths(t) == target.lengths(t)) {
                per[t] = {0.0, 0.0, 1.0, 0.0}; // congruent: dF is the identity
                continue;
            }
            const auto qs = flatten_triangle(source.lengths(t));
            const auto qt = flatten_triangle(target.lengths(t));
            Mat2d Ds, Dt;
            Ds << qs[1] - qs[0], qs[2] - qs[0];
            Dt << qt[1] - qt[0], qt[2] - qt[0];
            const LinMap2d dF(Dt * Ds.inverse()), dFinv(Ds * Dt.inverse());
            per[t] = {distortion(dF), distortion(dFinv), std::max(operator_norm(dF), operator_norm(dFinv)),
                      std::abs(target.area(t) / source.area(t) - 1.0)};
        }
    });

    MorphismStats s;
    for (int t = 0; t < nt; ++t) {
        s.sup_dis = std::max(s.sup_dis, per[t].dis);
        s.mean_dis += source.area(t) * per[t].dis;
        s.mean_dis_inverse += target.area(t) * per[t].dis_inv;
        s.bilip = std::max(s.bilip, per[t].bilip);
        s.vol_ratio_dev = std::max(s.vol_ratio_dev, per[t].vol);
    }

    const auto sources = distance_sources(source);
    std::vector<double> worst(sources.size(), 0.0);
    parallel_for(int(sources.size()), [&](int b, int e) {
        for (int i = b; i < e; ++i) {
            const auto ds = graph_distances(source, sources[i]);
            const auto dt = graph_distances(target, sources[i]);
            for (size_t v = 0; v < ds.size(); ++v) worst[i] = std::max(worst[i], std::abs(ds[v] - dt[v]));
        }
    }, 1);
    s.global_dis = *std::max_element(worst.begin(), worst.end());
    return s;
}

std::string to_string(ConvergenceClass c) {
    switch (c) {
        case ConvergenceClass::Uniform: return "Uniform";
        case ConvergenceClass::Mean:    return "Mean";
        case ConvergenceClass::Neither: return "Neither";
    }
    return "Neither";
}

namespace {
template <typename Field>
bool strictly_decreasing(std::span<const MorphismStats> seq, Field f) {
    for (size_t i = 1; i < seq.size(); ++i)
        if (!(f(seq[i]) < f(seq[i - 1]))) return false;
    return true;
}
} // namespace

ConvergenceClass classify_convergence(std::span<const MorphismStats> seq, const ConvergenceThresholds &thr) {
    if (seq.empty()) throw Error(ErrorCode::EmptySequence, "classify_convergence needs at least one element");
    const MorphismStats &last = seq.back();

    if (strictly_decreasing(seq, [](const MorphismStats &s) { return s.sup_dis; }) && last.sup_dis < thr.sup)
        return ConvergenceClass::Uniform;

    const bool bilip_bounded = std::all_of(seq.begin(), seq.end(),
                                           [&](const MorphismStats &s) { return s.bilip < thr.bilip; });
    if (strictly_decreasing(seq, [](const MorphismStats &s) { return s.mean_dis; }) && last.mean_dis < thr.mean &&
        bilip_bounded && last.vol_ratio_dev < thr.vol && last.global_dis < thr.global)
        return ConvergenceClass::Mean;

    return ConvergenceClass::Neither;
}

} // namespace incompat
