////////////////////////////////////////////////////////////////////////////////
// constructions.hpp
////////////////////////////////////////////////////////////////////////////////
//  Generators for converging families of body manifolds, plus the developing
//  map used to read off rotational and translational holonomy.
//
//  Structured generators share one grid topology: an NX x NY array of cells,
//  vertex (i, j) has id j (NX + 1) + i, and cell (i, j) is split along its
//  (i, j)-(i+1, j+1) diagonal into triangles 2c (below the diagonal) and
//  2c + 1 (above), c = j NX + i.
////////////////////////////////////////////////////////////////////////////////
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "incompat/body.hpp"

namespace incompat {

struct GridTopology {
    int nx = 0, ny = 0; // cells

    int vertex(int i, int j) const { return j * (nx + 1) + i; }
    int cell(int i, int j) const { return j * nx + i; }
    int lower_triangle(int i, int j) const { return 2 * cell(i, j); }
    int upper_triangle(int i, int j) const { return 2 * cell(i, j) + 1; }
};

// Closed strip through the ring of boundary cells of the cell rectangle
// [i0, i1] x [j0, j1], traversed counterclockwise.  Encloses every vertex
// strictly inside the rectangle.
std::vector<int> grid_ring_loop(const GridTopology &grid, int i0, int j0, int i1, int j1);

////////////////////////////////////////////////////////////////////////////////
// Flat patches and cones
////////////////////////////////////////////////////////////////////////////////
BodyMesh flat_square(int n, double side);
Configuration flat_square_layout(int n, double side);

// Cone metric dr^2 + alpha^2 r^2 dphi^2 on the disc of radius r_max, with
// `resolution` angular sectors and max(2, resolution / 4) rings.  Vertex 0 is the tip.
BodyMesh cone_mesh(double alpha, double r_max, int resolution);
// Same connectivity with alpha = 1: the flat disc.
BodyMesh disc_mesh(double r_max, int resolution);
// Planar development r e^{i alpha phi}: isometric on every sector except the ones closing the cut.
Configuration cone_development(double alpha, double r_max, int resolution);

////////////////////////////////////////////////////////////////////////////////
// Edge dislocations
////////////////////////////////////////////////////////////////////////////////
struct DislocationParams {
    double theta = 0.3;      // disclination half-angle; the disclinations carry charges -+2 theta
    double d = 0.05;         // separation |p- p+|
    double block_size = 1.0; // side of the block

    void validate() const;
    double burgers_magnitude() const;
};

struct DislocationBlock {
    BodyMesh mesh;
    GridTopology grid;
    int p_minus = -1; // cone angle 2 pi + 2 theta
    int p_plus = -1;  // cone angle 2 pi - 2 theta
    std::vector<int> dipole_loop; // strip around the block boundary, enclosing both
};

// The two polygons of the dipole construction, glued along x p- p+ y and
// meshed by a graded structured grid (kink cells of width d cos(theta) / refinement).
DislocationBlock dislocation_block(const DislocationParams &params, int refinement = 2);

enum class LatticeRegime { Mean, Uniform };

struct DislocationLattice {
    BodyMesh mesh;        // M_n
    BodyMesh limit;       // flat unit square on the same connectivity
    Configuration limit_layout; // isometric embedding of `limit`
    GridTopology grid;
    int n = 0;
    int block_nx = 0, block_ny = 0; // cells per block
    double theta = 0, d = 0;
    double burgers_total = 0; // b0 = 2 sin(theta0)

    // Strip around block (c, r), enclosing exactly that block's dipole.
    std::vector<int> block_loop(int c, int r) const;
};

// n x n blocks on the unit square, columns alternating in orientation so the
// blocks glue without gaps.  Per-block Burgers magnitude is b0 / n^2 with
// b0 = 2 sin(theta0); theta_n = theta0 (Mean) or theta0 n^{-epsilon} (Uniform).
DislocationLattice dislocation_lattice(int n, LatticeRegime mode, double theta0, double epsilon, int refinement = 2);

////////////////////////////////////////////////////////////////////////////////
// Euclidean-triangle approximations of a conformal metric e^{2 phi}(dx^2 + dy^2)
////////////////////////////////////////////////////////////////////////////////
using ConformalFactor = std::function<double(double, double)>;

// phi = -log(1 + (x^2 + y^2) / 4): a patch of a round sphere.
double spherical_cap_factor(double x, double y);

// g-length of the straight parameter segment a -> b (Simpson, 16 and 32 panels, one Richardson step).
double conformal_length(const ConformalFactor &phi, const Vec2d &a, const Vec2d &b);

// n x n grid on the unit square with g-lengths of the grid edges.
BodyMesh euclidean_triangulation(const ConformalFactor &phi, int n);
// euclidean_triangulation(phi, n) midpoint-subdivided onto the target_n grid
// (target_n = n 2^k): the same piecewise-flat surface on finer connectivity.
BodyMesh euclidean_triangulation_refined(const ConformalFactor &phi, int n, int target_n);

// Max |2 pi - cone angle| over interior vertices.
double max_cone_defect(const BodyMesh &mesh);

////////////////////////////////////////////////////////////////////////////////
// Developing map
////////////////////////////////////////////////////////////////////////////////
struct Holonomy {
    double rotation_angle = 0; // (-pi, pi]
    Vec2d translation = Vec2d::Zero();
};

// Lays the strip out triangle by triangle and returns the rigid motion that
// carries the final copy of the starting triangle back onto the first copy,
// in the first copy's chart.  A counterclockwise loop around one cone point
// gives its angle deficit.
Holonomy holonomy(const BodyMesh &mesh, std::span<const int> loop);

// Triangles around an interior vertex in counterclockwise order.
std::vector<int> vertex_loop(const BodyMesh &mesh, int v);

} // namespace incompat
