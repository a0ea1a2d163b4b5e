#include <gtest/gtest.h>

#include <map>
#include <numbers>
#include <sstream>

#include "aniso/mesh.hpp"
#include "oracles.hpp"

using namespace aniso;

namespace {

Polygon2D unit_square() { return Polygon2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }
Polygon2D right_triangle() { return Polygon2D({{0, 0}, {1, 0}, {0, 1}}); }
Polygon2D l_shape() { return Polygon2D({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}); }

bool on_polygon_boundary(const Polygon2D& p, const Vec2& x) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (detail::on_segment(x, p[i], p[(i + 1) % p.size()], 1e-10)) return true;
  return false;
}

// Edge use counts, boundary flags and orientation.
void expect_conforming(const TriMesh& m, const Polygon2D& p) {
  std::map<std::pair<int, int>, int> uses;
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    EXPECT_GT(m.triangle_area(t), 0.0);
    const auto& tr = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tr[k], b = tr[(k + 1) % 3];
      uses[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  for (const auto& [e, n] : uses) {
    ASSERT_LE(n, 2);
    const Vec2 mid = 0.5 * (m.nodes[e.first] + m.nodes[e.second]);
    if (n == 1) {
      EXPECT_TRUE(m.on_boundary[e.first]);
      EXPECT_TRUE(m.on_boundary[e.second]);
      EXPECT_TRUE(on_polygon_boundary(p, mid));
    } else {
      EXPECT_FALSE(on_polygon_boundary(p, mid));
    }
  }
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    EXPECT_EQ(static_cast<bool>(m.on_boundary[i]), on_polygon_boundary(p, m.nodes[i])) << i;
}

}  // namespace

TEST(MeshPolygon, Examples) {
  const TriMesh a = mesh_polygon(unit_square(), 0.6);
  EXPECT_LE(a.max_edge(), 0.6);
  EXPECT_NEAR(a.area(), 1.0, 1e-12);
  const TriMesh b = mesh_polygon(right_triangle(), 0.3);
  EXPECT_LE(b.max_edge(), 0.3);
  EXPECT_NEAR(b.area(), 0.5, 1e-12);
  const Polygon2D disc(oracle::regular_polygon(64));
  const TriMesh c = mesh_polygon(disc, 0.1);
  EXPECT_LE(c.max_edge(), 0.1);
  EXPECT_NEAR(c.area(), oracle::inscribed_polygon_area(64), 1e-12);
  EXPECT_NEAR(c.area() / std::numbers::pi, 1.0, 2e-3);
}

TEST(MeshPolygon, ConformingAndFlagged) {
  for (const auto& p : {unit_square(), right_triangle(), l_shape(), Polygon2D(oracle::regular_polygon(32, 2.0, 1.0))}) {
    const TriMesh m = mesh_polygon(p, 0.2);
    expect_conforming(m, p);
    EXPECT_NEAR(m.area(), measure(p), 1e-12 * measure(p));
    EXPECT_DOUBLE_EQ(m.h, m.max_edge());
    EXPECT_GT(m.min_angle(), 15.0);
  }
}

TEST(MeshPolygon, RejectsBadInput) {
  EXPECT_THROW(mesh_polygon(unit_square(), 0.0), std::invalid_argument);
  EXPECT_THROW(mesh_polygon(Polygon2D({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), 0.1), std::invalid_argument);
}

TEST(RefineUniform, HalvesMeshSize) {
  const TriMesh m = mesh_polygon(l_shape(), 0.3);
  const TriMesh f = refine_uniform(m);
  EXPECT_EQ(f.triangles.size(), 4 * m.triangles.size());
  EXPECT_NEAR(f.h, 0.5 * m.h, 1e-14);
  EXPECT_NEAR(f.area(), m.area(), 1e-12);
  expect_conforming(f, l_shape());
  // nested: every coarse node survives with the same coordinates
  for (std::size_t i = 0; i < m.nodes.size(); ++i) EXPECT_EQ(f.nodes[i], m.nodes[i]);
}

TEST(MapMesh, KeepsOrientation) {
  const TriMesh m = mesh_polygon(unit_square(), 0.4);
  Mat2 flip;
  flip << 0, 1, 1, 0;
  const TriMesh r = map_mesh(m, 2.0 * flip);
  for (std::size_t t = 0; t < r.triangles.size(); ++t) EXPECT_GT(r.triangle_area(t), 0.0);
  EXPECT_NEAR(r.area(), 4.0, 1e-12);
}

TEST(WriteMesh, PlainTextLayout) {
  const TriMesh m = mesh_polygon(right_triangle(), 1.0);
  std::ostringstream os;
  write_mesh(os, m);
  std::istringstream is(os.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(is, line)) ++lines;
  EXPECT_EQ(lines, m.nodes.size() + m.triangles.size() + 1);
}

TEST(MeshProperty, RandomPolygonsAreConforming) {
  oracle::Gen gen(51);
  for (int i = 0; i < 100; ++i) {
    const Polygon2D p(i % 2 ? gen.convex_polygon() : gen.star_polygon());
    const double h = gen.uniform(0.1, 0.4);
    const TriMesh m = mesh_polygon(p, h);
    EXPECT_LE(m.max_edge(), h);
    EXPECT_NEAR(m.area(), measure(p), 1e-11 * measure(p));
    expect_conforming(m, p);
  }
}
