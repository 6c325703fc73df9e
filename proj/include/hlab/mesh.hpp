#ifndef HLAB_MESH_HPP
#define HLAB_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hlab/geometry.hpp"

namespace hlab {

/// Shared triangle-mesh core used by both mesh kinds. Triangles carry their
/// own corner coordinates so periodic (wrapped) connectivity on the torus and
/// plain connectivity on domains go through the same assembly path.
struct TriMesh {
    std::vector<Vec2> node;                    // logical node coordinates
    std::vector<std::array<int, 3>> tri;       // logical node ids, CCW
    std::vector<std::array<Vec2, 3>> corner;   // geometric corners (unwrapped)
    std::vector<double> area;                  // per triangle, > 0
    std::vector<double> mass;                  // lumped nodal mass (area/3 scatter)
    double total_area = 0.0;

    int node_count() const { return static_cast<int>(node.size()); }
    int tri_count() const { return static_cast<int>(tri.size()); }
    Vec2 centroid(int t) const {
        const auto& c = corner[static_cast<size_t>(t)];
        return (c[0] + c[1] + c[2]) / 3.0;
    }
    void finalize(); // computes area, mass, total_area; throws on area <= 0
};

/// Uniform periodic triangulation of [0,1)^2: n^2 logical nodes, 2n^2
/// triangles, no duplicated boundary nodes.
struct TorusMesh {
    int n = 0;
    TriMesh geom;
    double h = 0.0; // longest edge = sqrt(2)/n

    /// Logical node id at grid position (i, j), wrapped.
    int node_id(int i, int j) const {
        i %= n; if (i < 0) i += n;
        j %= n; if (j < 0) j += n;
        return j * n + i;
    }
};

TorusMesh build_torus_mesh(int n);

struct BoundaryEdge {
    int a = 0, b = 0;      // node ids, CCW along the loop
    Vec2 normal;           // outward unit normal
    double length = 0.0;
    Vec2 midpoint;
    int tri = -1;          // adjacent triangle
};

enum class DomainShape { Disk, Flower };

DomainShape parse_shape(const std::string& s);

/// Boundary-fitted triangulation of a smooth star-shaped planar domain.
/// Boundary nodes sit exactly on the analytic curve; the polygonal boundary
/// is used consistently for all boundary integrals and distances.
struct DomainMesh {
    DomainShape shape = DomainShape::Disk;
    int n = 0;                       // boundary node count
    TriMesh geom;
    std::vector<BoundaryEdge> bedge; // single closed CCW loop
    std::vector<int> bnode;          // boundary node ids in loop order
    std::vector<char> is_boundary;   // per node
    std::vector<double> delta;       // per-node distance to the boundary polygon
    std::vector<double> tri_delta;   // per-triangle centroid distance
    double h = 0.0;                  // longest triangle edge
    double h_nominal = 0.0;          // 2*pi/n
    double perimeter = 0.0;
    double min_angle_deg = 0.0;
    int anchor_node = -1;            // node nearest the origin

    /// Distance from an arbitrary point to the boundary polygon. An optional
    /// known upper bound on the distance tightens the internal edge search.
    double distance_to_boundary(const Vec2& p, double upper_hint = 1e300) const;
};

DomainMesh build_domain_mesh(DomainShape shape, int n);

/// Analytic boundary curve point for a shape (radius 1 disk or the flower
/// r(theta) = 1 + 0.1 sin(3 theta)).
Vec2 boundary_curve(DomainShape shape, double theta);

/// Per-edge (normal, length, midpoint) view; the data already lives on the
/// mesh, this accessor exists as the documented query surface.
const std::vector<BoundaryEdge>& boundary_geometry(const DomainMesh& mesh);

/// Plain-text debug dump (one section per array; not a stability contract).
void dump_mesh(const TriMesh& mesh, std::ostream& os);

} // namespace hlab

#endif
