#include "hlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace hlab {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kTwoPi = 2.0 * kPi;

double tri_signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * (b - a).cross(c - a);
}
} // namespace

void TriMesh::finalize() {
    const size_t nt = tri.size();
    area.assign(nt, 0.0);
    mass.assign(node.size(), 0.0);
    total_area = 0.0;
    for (size_t t = 0; t < nt; ++t) {
        double a = tri_signed_area(corner[t][0], corner[t][1], corner[t][2]);
        if (!(a > 0.0))
            throw std::runtime_error("TriMesh: non-positive triangle area");
        area[t] = a;
        total_area += a;
        for (int v = 0; v < 3; ++v)
            mass[static_cast<size_t>(tri[t][static_cast<size_t>(v)])] += a / 3.0;
    }
}

// ----------------------------------------------------------------------------
// Torus mesh
// ----------------------------------------------------------------------------

TorusMesh build_torus_mesh(int n) {
    if (n < 4)
        throw std::invalid_argument("build_torus_mesh: n >= 4 required");

    TorusMesh m;
    m.n = n;
    TriMesh& g = m.geom;
    g.node.resize(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            g.node[static_cast<size_t>(j * n + i)] = {double(i) / n, double(j) / n};

    g.tri.reserve(static_cast<size_t>(2) * n * n);
    g.corner.reserve(g.tri.capacity());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // unwrapped square corners; logical ids wrap
            Vec2 p00{double(i) / n, double(j) / n};
            Vec2 p10{double(i + 1) / n, double(j) / n};
            Vec2 p11{double(i + 1) / n, double(j + 1) / n};
            Vec2 p01{double(i) / n, double(j + 1) / n};
            int v00 = m.node_id(i, j), v10 = m.node_id(i + 1, j);
            int v11 = m.node_id(i + 1, j + 1), v01 = m.node_id(i, j + 1);
            g.tri.push_back({v00, v10, v11});
            g.corner.push_back({p00, p10, p11});
            g.tri.push_back({v00, v11, v01});
            g.corner.push_back({p00, p11, p01});
        }
    }
    g.finalize();
    m.h = std::sqrt(2.0) / n;
    return m;
}

// ----------------------------------------------------------------------------
// Domain mesh
// ----------------------------------------------------------------------------

DomainShape parse_shape(const std::string& s) {
    if (s == "disk") return DomainShape::Disk;
    if (s == "flower") return DomainShape::Flower;
    throw std::invalid_argument("unknown domain shape '" + s + "'");
}

Vec2 boundary_curve(DomainShape shape, double theta) {
    double r = 1.0;
    if (shape == DomainShape::Flower) r = 1.0 + 0.1 * std::sin(3.0 * theta);
    return {r * std::cos(theta), r * std::sin(theta)};
}

namespace {

// Triangulate the annulus between two star-shaped CCW node rings by merging
// the two angle sequences. Produces inner.size() + outer.size() triangles.
void stitch_annulus(const std::vector<int>& inner, const std::vector<double>& inner_ang,
                    const std::vector<int>& outer, const std::vector<double>& outer_ang,
                    const std::vector<Vec2>& nodes,
                    std::vector<std::array<int, 3>>& tris) {
    const size_t ni = inner.size(), no = outer.size();
    size_t i = 0, j = 0;
    auto ia = [&](size_t k) { return (k < ni) ? inner_ang[k] : inner_ang[k - ni] + kTwoPi; };
    auto oa = [&](size_t k) { return (k < no) ? outer_ang[k] : outer_ang[k - no] + kTwoPi; };
    auto iv = [&](size_t k) { return inner[k % ni]; };
    auto ov = [&](size_t k) { return outer[k % no]; };
    (void)nodes;
    while (i < ni || j < no) {
        bool advance_outer;
        if (i == ni) advance_outer = true;
        else if (j == no) advance_outer = false;
        else advance_outer = (oa(j + 1) <= ia(i + 1));
        if (advance_outer) {
            tris.push_back({iv(i), ov(j), ov(j + 1)});
            ++j;
        } else {
            tris.push_back({ov(j), iv(i + 1), iv(i)});
            ++i;
        }
    }
}

double min_triangle_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
    auto ang = [](const Vec2& p, const Vec2& q, const Vec2& r) {
        Vec2 u = q - p, v = r - p;
        double d = u.dot(v) / (u.norm() * v.norm());
        d = std::clamp(d, -1.0, 1.0);
        return std::acos(d);
    };
    double m = std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
    return m * 180.0 / kPi;
}

} // namespace

DomainMesh build_domain_mesh(DomainShape shape, int n) {
    if (n < 8)
        throw std::invalid_argument("build_domain_mesh: n >= 8 required");

    DomainMesh m;
    m.shape = shape;
    m.n = n;
    TriMesh& g = m.geom;

    const int rings = std::max(2, static_cast<int>(std::lround(n / kTwoPi)));

    // Node layout: center node 0, then rings k = 1..rings outward.
    g.node.push_back({0.0, 0.0});
    std::vector<std::vector<int>> ring_ids(static_cast<size_t>(rings) + 1);
    std::vector<std::vector<double>> ring_ang(static_cast<size_t>(rings) + 1);
    for (int k = 1; k <= rings; ++k) {
        int mk = (k == rings)
                     ? n
                     : std::max(6, static_cast<int>(std::lround(double(n) * k / rings)));
        double t = double(k) / rings;
        for (int q = 0; q < mk; ++q) {
            double theta = kTwoPi * q / mk;
            ring_ids[static_cast<size_t>(k)].push_back(static_cast<int>(g.node.size()));
            ring_ang[static_cast<size_t>(k)].push_back(theta);
            g.node.push_back(boundary_curve(shape, theta) * t);
        }
    }

    // Center fan, then stitched annuli.
    {
        const auto& r1 = ring_ids[1];
        const size_t m1 = r1.size();
        for (size_t q = 0; q < m1; ++q)
            g.tri.push_back({0, r1[q], r1[(q + 1) % m1]});
    }
    for (int k = 1; k < rings; ++k)
        stitch_annulus(ring_ids[static_cast<size_t>(k)], ring_ang[static_cast<size_t>(k)],
                       ring_ids[static_cast<size_t>(k) + 1], ring_ang[static_cast<size_t>(k) + 1],
                       g.node, g.tri);

    g.corner.resize(g.tri.size());
    for (size_t t = 0; t < g.tri.size(); ++t)
        for (int v = 0; v < 3; ++v)
            g.corner[t][static_cast<size_t>(v)] =
                g.node[static_cast<size_t>(g.tri[t][static_cast<size_t>(v)])];
    g.finalize();

    // Boundary loop (outermost ring) with outward normals.
    const auto& rb = ring_ids[static_cast<size_t>(rings)];
    m.bnode = rb;
    m.is_boundary.assign(g.node.size(), 0);
    for (int id : rb) m.is_boundary[static_cast<size_t>(id)] = 1;

    std::map<std::pair<int, int>, int> bedge_of;
    for (int q = 0; q < n; ++q) {
        BoundaryEdge e;
        e.a = rb[static_cast<size_t>(q)];
        e.b = rb[static_cast<size_t>((q + 1) % n)];
        Vec2 pa = g.node[static_cast<size_t>(e.a)], pb = g.node[static_cast<size_t>(e.b)];
        Vec2 d = pb - pa;
        e.length = d.norm();
        e.normal = Vec2{d.y, -d.x} / e.length;
        e.midpoint = (pa + pb) * 0.5;
        m.perimeter += e.length;
        bedge_of[{std::min(e.a, e.b), std::max(e.a, e.b)}] = q;
        m.bedge.push_back(e);
    }
    for (size_t t = 0; t < g.tri.size(); ++t) {
        for (int v = 0; v < 3; ++v) {
            int a = g.tri[t][static_cast<size_t>(v)], b = g.tri[t][static_cast<size_t>((v + 1) % 3)];
            auto it = bedge_of.find({std::min(a, b), std::max(a, b)});
            if (it != bedge_of.end())
                m.bedge[static_cast<size_t>(it->second)].tri = static_cast<int>(t);
        }
    }
    for (const auto& e : m.bedge)
        if (e.tri < 0)
            throw std::runtime_error("build_domain_mesh: boundary edge without triangle");

    // Mesh quality metrics.
    m.h_nominal = kTwoPi / n;
    m.h = 0.0;
    m.min_angle_deg = 180.0;
    for (size_t t = 0; t < g.tri.size(); ++t) {
        const auto& c = g.corner[t];
        for (int v = 0; v < 3; ++v)
            m.h = std::max(m.h, (c[static_cast<size_t>((v + 1) % 3)] - c[static_cast<size_t>(v)]).norm());
        m.min_angle_deg = std::min(m.min_angle_deg, min_triangle_angle_deg(c[0], c[1], c[2]));
    }

    // Distances to the boundary polygon. Consecutive nodes are near each
    // other (ring order), so the previous delta gives a tight search hint.
    m.delta.resize(g.node.size());
    for (size_t v = 0; v < g.node.size(); ++v) {
        if (m.is_boundary[v]) {
            m.delta[v] = 0.0;
            continue;
        }
        double hint = 1e300;
        if (v > 0) hint = m.delta[v - 1] + (g.node[v] - g.node[v - 1]).norm();
        m.delta[v] = m.distance_to_boundary(g.node[v], hint);
    }
    m.tri_delta.resize(g.tri.size());
    for (size_t t = 0; t < g.tri.size(); ++t) {
        Vec2 c = g.centroid(static_cast<int>(t));
        double hint = 1e300;
        for (int v = 0; v < 3; ++v) {
            int id = g.tri[t][static_cast<size_t>(v)];
            hint = std::min(hint, m.delta[static_cast<size_t>(id)] +
                                      (c - g.node[static_cast<size_t>(id)]).norm());
        }
        m.tri_delta[t] = m.distance_to_boundary(c, hint);
    }

    // Anchor: node nearest the origin (lowest id on ties).
    m.anchor_node = 0;
    double best = g.node[0].norm2();
    for (size_t v = 1; v < g.node.size(); ++v)
        if (g.node[v].norm2() < best) {
            best = g.node[v].norm2();
            m.anchor_node = static_cast<int>(v);
        }
    return m;
}

double DomainMesh::distance_to_boundary(const Vec2& p, double upper_hint) const {
    const int nb = n;
    const double dtheta = kTwoPi / nb;

    // Rigorous radius bounds for points on boundary edges: a chord point
    // satisfies |X| >= min(|a|,|b|) cos(dtheta/2) and lies in the endpoint
    // angular wedge. Node radii come from the analytic curves.
    const double r_curve_lo = (shape == DomainShape::Flower) ? 0.9 : 1.0;
    const double r_hi = (shape == DomainShape::Flower) ? 1.1 : 1.0;
    const double r_lo = r_curve_lo * std::cos(0.5 * dtheta);

    double tp = std::atan2(p.y, p.x);
    if (tp < 0.0) tp += kTwoPi;
    int q0 = std::clamp(static_cast<int>(tp / dtheta), 0, nb - 1);
    const double rho = p.norm();

    auto edge_dist = [&](int q) {
        q %= nb;
        if (q < 0) q += nb;
        const auto& e = bedge[static_cast<size_t>(q)];
        return point_segment_distance(p, geom.node[static_cast<size_t>(e.a)],
                                      geom.node[static_cast<size_t>(e.b)]);
    };

    double best = std::min({edge_dist(q0 - 1), edge_dist(q0), edge_dist(q0 + 1)});
    double prune = std::min(best, upper_hint); // valid upper bound on the true min
    for (int w = 2; w <= nb / 2 + 1; ++w) {
        // Any point on edges at window offset >= w has angular offset
        // >= (w-1)*dtheta from tp; prune once that implies a larger distance.
        double phi = std::min((w - 1) * dtheta, kPi);
        double c = std::cos(phi);
        double rstar = std::clamp(rho * c, r_lo, r_hi);
        double lb2 = rho * rho + rstar * rstar - 2.0 * rho * rstar * c;
        if (lb2 > prune * prune) break;
        best = std::min(best, std::min(edge_dist(q0 - w), edge_dist(q0 + w)));
        prune = std::min(prune, best);
    }
    return best;
}

const std::vector<BoundaryEdge>& boundary_geometry(const DomainMesh& mesh) {
    return mesh.bedge;
}

void dump_mesh(const TriMesh& mesh, std::ostream& os) {
    os << "# nodes " << mesh.node.size() << "\n";
    for (const auto& p : mesh.node) os << p.x << " " << p.y << "\n";
    os << "# triangles " << mesh.tri.size() << " (logical node ids)\n";
    for (const auto& t : mesh.tri) os << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "# areas " << mesh.area.size() << "\n";
    for (double a : mesh.area) os << a << "\n";
}

} // namespace hlab
