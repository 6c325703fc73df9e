#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "hlab/mesh.hpp"

using namespace hlab;

namespace {
const double kPi = 3.1415926535897932384626433832795;

double polygon_area_defect(int n) {
    auto mesh = build_domain_mesh(DomainShape::Disk, n);
    return kPi - mesh.geom.total_area;
}

// Exhaustive point-to-boundary-polygon distance (test oracle).
double brute_force_delta(const DomainMesh& m, const Vec2& p) {
    double best = 1e300;
    for (const auto& e : m.bedge)
        best = std::min(best, point_segment_distance(p, m.geom.node[size_t(e.a)],
                                                     m.geom.node[size_t(e.b)]));
    return best;
}
} // namespace

TEST_CASE("torus mesh counting and area") {
    SUBCASE("n=4") {
        auto m = build_torus_mesh(4);
        CHECK(m.geom.node_count() == 16);
        CHECK(m.geom.tri_count() == 32);
        CHECK(m.geom.total_area == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("n=256") {
        auto m = build_torus_mesh(256);
        CHECK(m.geom.node_count() == 65536);
        CHECK(std::abs(m.geom.total_area - 1.0) < 1e-12);
    }
    SUBCASE("n=3 rejected") {
        CHECK_THROWS_AS(build_torus_mesh(3), std::invalid_argument);
    }
}

TEST_CASE("torus mesh is a closed surface: every edge shared by two triangles") {
    auto m = build_torus_mesh(8);
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& t : m.geom.tri)
        for (int v = 0; v < 3; ++v) {
            int a = t[size_t(v)], b = t[size_t((v + 1) % 3)];
            edge_count[{std::min(a, b), std::max(a, b)}]++;
        }
    for (const auto& [e, c] : edge_count) CHECK(c == 2);
    for (double a : m.geom.area) CHECK(a > 0.0);
}

TEST_CASE("disk mesh geometry") {
    SUBCASE("boundary nodes on the unit circle, area near pi") {
        auto m = build_domain_mesh(DomainShape::Disk, 64);
        CHECK(m.bnode.size() == 64);
        for (int id : m.bnode)
            CHECK(m.geom.node[size_t(id)].norm() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(m.geom.total_area - kPi) <= 0.01);
        CHECK(std::abs(m.perimeter - 2.0 * kPi) <= 1e-2);
    }
    SUBCASE("n < 8 rejected") {
        CHECK_THROWS_AS(build_domain_mesh(DomainShape::Disk, 7), std::invalid_argument);
    }
    SUBCASE("area defect quarters under refinement") {
        double d1 = polygon_area_defect(64);
        double d2 = polygon_area_defect(128);
        CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.15)); // in [3.5, 4.5]
    }
    SUBCASE("refinement halves h") {
        auto a = build_domain_mesh(DomainShape::Disk, 64);
        auto b = build_domain_mesh(DomainShape::Disk, 128);
        CHECK(a.h / b.h == doctest::Approx(2.0).epsilon(0.2));
    }
}

TEST_CASE("mesh quality: min angle >= 20 degrees") {
    for (auto shape : {DomainShape::Disk, DomainShape::Flower}) {
        for (int n : {64, 128, 256}) {
            auto m = build_domain_mesh(shape, n);
            INFO("shape ", (shape == DomainShape::Disk ? "disk" : "flower"), " n ", n);
            CHECK(m.min_angle_deg >= 20.0);
        }
    }
}

TEST_CASE("flower mesh boundary is a single closed loop") {
    auto m = build_domain_mesh(DomainShape::Flower, 128);
    CHECK(m.bedge.size() == 128);
    // closed walk: each edge starts where the previous ended
    for (size_t q = 0; q < m.bedge.size(); ++q)
        CHECK(m.bedge[q].b == m.bedge[(q + 1) % m.bedge.size()].a);
    // every boundary node on the analytic curve
    for (int id : m.bnode) {
        Vec2 p = m.geom.node[size_t(id)];
        double theta = std::atan2(p.y, p.x);
        double r_exact = 1.0 + 0.1 * std::sin(3.0 * theta);
        CHECK(p.norm() == doctest::Approx(r_exact).epsilon(1e-12));
    }
    CHECK(m.min_angle_deg >= 20.0);
}

TEST_CASE("boundary geometry identities") {
    for (auto shape : {DomainShape::Disk, DomainShape::Flower}) {
        auto m = build_domain_mesh(shape, 64);
        Vec2 closed{0.0, 0.0};
        for (const auto& e : boundary_geometry(m)) {
            CHECK(e.normal.norm() == doctest::Approx(1.0).epsilon(1e-14));
            closed += e.normal * e.length;
            // outward: normal points away from the adjacent triangle centroid
            Vec2 c = m.geom.centroid(e.tri);
            CHECK(e.normal.dot(c - e.midpoint) < 0.0);
        }
        CHECK(closed.norm() <= 1e-12);
    }
}

TEST_CASE("disk edge normals are radial to O(h^2)") {
    // For a circular arc the chord-midpoint normal is exactly radial
    // (perpendicular bisector through the center), so the angular error is
    // pure roundoff and in particular below h^2 at every refinement.
    for (int n : {64, 128}) {
        auto m = build_domain_mesh(DomainShape::Disk, n);
        double worst = 0.0;
        for (const auto& e : m.bedge) {
            Vec2 radial = e.midpoint / e.midpoint.norm();
            worst = std::max(worst, std::acos(std::min(1.0, e.normal.dot(radial))));
        }
        CHECK(worst <= m.h * m.h);
    }
}

TEST_CASE("delta equals brute-force distance to boundary polygon") {
    for (auto shape : {DomainShape::Disk, DomainShape::Flower}) {
        for (int n : {64, 128}) {
            auto m = build_domain_mesh(shape, n);
            for (int v = 0; v < m.geom.node_count(); ++v) {
                double bf = brute_force_delta(m, m.geom.node[size_t(v)]);
                CHECK(std::abs(m.delta[size_t(v)] - bf) <= 1e-12);
                if (m.is_boundary[size_t(v)])
                    CHECK(m.delta[size_t(v)] == 0.0);
                else
                    CHECK(m.delta[size_t(v)] > 0.0);
            }
            for (int t = 0; t < m.geom.tri_count(); ++t) {
                double bf = brute_force_delta(m, m.geom.centroid(t));
                CHECK(std::abs(m.tri_delta[size_t(t)] - bf) <= 1e-12);
            }
        }
    }
}

TEST_CASE("anchor node is nearest the origin") {
    auto m = build_domain_mesh(DomainShape::Disk, 64);
    double anchor_r = m.geom.node[size_t(m.anchor_node)].norm();
    for (const auto& p : m.geom.node) CHECK(anchor_r <= p.norm() + 1e-15);
    CHECK(anchor_r < 1e-12); // ring construction places a node at the origin
}
