////////////////////////////////////////////////////////////////////////////////
// body.hpp
////////////////////////////////////////////////////////////////////////////////
//  Intrinsic triangulated body manifolds.  A mesh stores connectivity and one
//  reference length per triangle edge, nothing else: each triangle carries the
//  flat metric of the Euclidean triangle with those lengths, and vertices whose
//  incident angles do not sum to 2 pi are the singular (cone) points.
//
//  Configurations are piecewise-affine maps into the Euclidean plane, stored
//  as one row per vertex.
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "incompat/linmap.hpp"

namespace incompat {

using Triangle    = std::array<int, 3>;
using EdgeLengths = std::array<double, 3>; // (l01, l12, l20)
using Points      = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Edge {
    int a, b;       // a < b
    double length;
};

class BodyMesh {
public:
    BodyMesh() = default;
    // Validates every mesh invariant; throws BadTriangle / InvalidMesh.
    BodyMesh(int vertex_count, std::vector<Triangle> triangles, std::vector<EdgeLengths> lengths);

    int vertex_count() const { return m_vertex_count; }
    int triangle_count() const { return int(m_triangles.size()); }

    const std::vector<Triangle> &triangles() const { return m_triangles; }
    const std::vector<EdgeLengths> &lengths() const { return m_lengths; }
    const Triangle &triangle(int t) const { return m_triangles[t]; }
    const EdgeLengths &lengths(int t) const { return m_lengths[t]; }

    const std::vector<Edge> &edges() const { return m_edges; }
    double area(int t) const { return m_area[t]; }
    const std::vector<double> &areas() const { return m_area; }
    double total_area() const;

    // Inverse of the reference frame [q1 - q0, q2 - q0] of the flattened triangle.
    const Mat2d &reference_inverse(int t) const { return m_ref_inverse[t]; }

    bool is_boundary_vertex(int v) const { return m_boundary[v] != 0; }
    bool has_boundary() const;
    // Boundary vertices in traversal order (counterclockwise); requires a single boundary loop.
    std::vector<int> boundary_loop() const;

    const std::vector<int> &vertex_triangles(int v) const { return m_vertex_tris[v]; }
    // Triangle across edge (t, local edge e = (e, e+1 mod 3)), or -1 on the boundary.
    int neighbor(int t, int e) const { return m_neighbors[t][e]; }

    bool same_connectivity(const BodyMesh &other) const { return m_triangles == other.m_triangles && m_vertex_count == other.m_vertex_count; }
    BodyMesh with_lengths(std::vector<EdgeLengths> lengths) const;
    BodyMesh scaled(double factor) const;

private:
    int m_vertex_count = 0;
    std::vector<Triangle> m_triangles;
    std::vector<EdgeLengths> m_lengths;

    std::vector<Edge> m_edges;
    std::vector<double> m_area;
    std::vector<Mat2d> m_ref_inverse;
    std::vector<char> m_boundary;
    std::vector<std::vector<int>> m_vertex_tris;
    std::vector<std::array<int, 3>> m_neighbors;
};

class Configuration {
public:
    Configuration() = default;
    explicit Configuration(Points positions);

    int vertex_count() const { return int(m_positions.rows()); }
    const Points &positions() const { return m_positions; }
    Vec2d position(int v) const { return m_positions.row(v).transpose(); }

private:
    Points m_positions;
};

////////////////////////////////////////////////////////////////////////////////
// Triangle geometry
////////////////////////////////////////////////////////////////////////////////
// q0 = (0,0), q1 = (l01, 0), q2 in the upper half plane.
std::array<Vec2d, 3> flatten_triangle(const EdgeLengths &l);
bool satisfies_triangle_inequality(const EdgeLengths &l);
double heron_area(const EdgeLengths &l);
// Interior angle at local corner c, by the law of cosines.
double corner_angle(const EdgeLengths &l, int c);

double triangle_area(const BodyMesh &mesh, int t);
// Sum of incident reference angles at an interior vertex.
double cone_angle(const BodyMesh &mesh, int v);

// dF = D_target D_ref^{-1}, Euclidean domain and codomain.
LinMap2d deformation_gradient(const BodyMesh &mesh, const Configuration &u, int t);
// Planar layout of each triangle's flattening, glued where possible; exact for flat discs.
Configuration develop(const BodyMesh &mesh);

////////////////////////////////////////////////////////////////////////////////
// Morphisms between meshes sharing connectivity (identity on vertices)
////////////////////////////////////////////////////////////////////////////////
struct MorphismStats {
    double sup_dis = 0;          // max_T Dis dF
    double mean_dis = 0;         // sum_T Area_source(T) Dis dF
    double mean_dis_inverse = 0; // sum_T Area_target(T) Dis dF^{-1}
    double bilip = 0;            // max_T max(|dF|_inf, |dF^{-1}|_inf)
    double vol_ratio_dev = 0;    // max_T |Area_target / Area_source - 1|
    double global_dis = 0;       // max over sampled vertex pairs of |d_source - d_target|
};

MorphismStats morphism_stats(const BodyMesh &source, const BodyMesh &target);

// Shortest edge-path distances from one vertex, weighted by reference lengths.
std::vector<double> graph_distances(const BodyMesh &mesh, int source);
// Sources used for global distortion and diameter: every vertex on small meshes,
// otherwise 64 evenly strided vertices (at least 64 * V >= 10^3 pairs).
std::vector<int> distance_sources(const BodyMesh &mesh);
double graph_diameter(const BodyMesh &mesh);

enum class ConvergenceClass { Uniform, Mean, Neither };
std::string to_string(ConvergenceClass c);

struct ConvergenceThresholds {
    double sup = 0.1;
    double mean = 0.05;
    double bilip = 10.0;
    double vol = 0.1;
    double global = 0.1;
};

ConvergenceClass classify_convergence(std::span<const MorphismStats> sequence,
                                      const ConvergenceThresholds &thresholds = {});

////////////////////////////////////////////////////////////////////////////////
// bodymesh v1 / bodyconf v1
////////////////////////////////////////////////////////////////////////////////
void write_bodymesh(std::ostream &os, const BodyMesh &mesh);
BodyMesh read_bodymesh(std::istream &is);
void save_bodymesh(const std::string &path, const BodyMesh &mesh);
BodyMesh load_bodymesh(const std::string &path);

void write_bodyconf(std::ostream &os, const Configuration &u);
Configuration read_bodyconf(std::istream &is);
void save_bodyconf(const std::string &path, const Configuration &u);
Configuration load_bodyconf(const std::string &path);

std::string format_double(double x); // %.17g

} // namespace incompat
