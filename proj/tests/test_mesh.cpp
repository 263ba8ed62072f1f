#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geoforge/mesh.hpp"
#include "geoforge/shapes.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace geoforge;

TEST_CASE("constructor rejects out-of-range, repeated and non-finite input") {
  const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_NOTHROW(TriangleMesh(v, {{0, 1, 2}}));
  CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 3}}), InvalidArgument);
  CHECK_THROWS_AS(TriangleMesh(v, {{0, 1, 1}}), InvalidArgument);
  auto bad = v;
  bad[1].x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(TriangleMesh(bad, {{0, 1, 2}}), InvalidArgument);
  bad[1].x() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(TriangleMesh(bad, {{0, 1, 2}}), InvalidArgument);
}

TEST_CASE("mesh_from_faces drops degenerate faces and counts them") {
  const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
  // repeated index, collinear sliver, valid
  const TriangleMesh m = mesh_from_faces(v, {{0, 0, 1}, {0, 1, 3}, {0, 1, 2}});
  CHECK(m.triangle_count() == 1);
  CHECK(m.dropped_degenerate() == 2);
  CHECK_THROWS_AS(mesh_from_faces(v, {{0, 1, 3}}), InvalidArgument);
}

TEST_CASE("normalization fits the longest axis into the margin-inset cube") {
  const TriangleMesh b = shapes::box({1, 2, 3}, {5, 4, 4});
  const auto [n, xf] = normalize_mesh(b, 0.02);
  const Aabb box = n.bounds();
  CHECK(box.lo.x() == doctest::Approx(-0.98).epsilon(1e-12));
  CHECK(box.hi.x() == doctest::Approx(0.98).epsilon(1e-12));
  CHECK(box.hi.y() == doctest::Approx(0.49).epsilon(1e-12));
  CHECK((box.lo + box.hi).norm() < 1e-12);
  for (std::size_t i = 0; i < b.vertex_count(); ++i) {
    CHECK((xf.inverse(n.vertices()[i]) - b.vertices()[i]).norm() < 1e-12);
    CHECK((xf.inverted().apply(n.vertices()[i]) - b.vertices()[i]).norm() < 1e-12);
  }
  CHECK_THROWS_AS(normalize_mesh(shapes::box({0, 0, 0}, {1, 1, 1}), 0.6), InvalidArgument);
  const std::vector<Vec3> same(3, Vec3(1, 1, 1));
  const TriangleMesh point(same, {});
  CHECK_THROWS(normalize_mesh(point));
}

TEST_CASE("volume of closed meshes matches analytic values and an extended-precision sum") {
  const TriangleMesh b = shapes::box({-1, -2, 0}, {2, 1, 0.5});
  CHECK(mesh_volume(b) == doctest::Approx(4.5).epsilon(1e-14));
  const TriangleMesh s = shapes::icosphere(0.7, 4, {0.1, 0.2, -0.3});
  CHECK(std::abs(mesh_volume(s) - static_cast<double>(oracle::volume(s))) < 1e-12);
  CHECK(mesh_volume(s) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 0.343).epsilon(0.01));
  // translation invariance
  const TriangleMesh moved = shapes::translated(s, {3, -4, 5});
  CHECK(mesh_volume(moved) == doctest::Approx(mesh_volume(s)).epsilon(1e-10));
}

TEST_CASE("watertight report distinguishes boundary, non-manifold and inconsistent edges") {
  CHECK(is_watertight(shapes::box({0, 0, 0}, {1, 1, 1})).watertight);
  CHECK(is_watertight(shapes::icosphere(1, 2)).watertight);
  CHECK(is_watertight(shapes::torus(1, 0.3, 16, 8)).watertight);
  CHECK(is_watertight(shapes::cylinder(1, 1, 12)).watertight);

  const WatertightReport open = is_watertight(shapes::open_box({0, 0, 0}, {1, 1, 1}));
  CHECK_FALSE(open.watertight);
  CHECK(open.boundary_edges == 4);

  // Flip one triangle of a closed box.
  const TriangleMesh b = shapes::box({0, 0, 0}, {1, 1, 1});
  auto tris = b.triangles();
  std::swap(tris[0][1], tris[0][2]);
  const WatertightReport flipped = is_watertight(TriangleMesh(b.vertices(), tris));
  CHECK_FALSE(flipped.watertight);
  CHECK(flipped.inconsistent_edges == 3);
  CHECK(flipped.boundary_edges == 0);

  // Three triangles sharing one edge.
  const std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
  const WatertightReport fan = is_watertight(TriangleMesh(v, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}));
  CHECK(fan.nonmanifold_edges == 1);
  CHECK_FALSE(fan.watertight);
}

TEST_CASE("components count vertex-connected pieces") {
  const std::vector<TriangleMesh> parts = {shapes::icosphere(0.3, 1), shapes::icosphere(0.3, 1, {1, 0, 0}),
                                           shapes::box({2, 2, 2}, {3, 3, 3})};
  CHECK(count_components(shapes::merge(parts)) == 3);
  CHECK(count_components(parts[0]) == 1);
}

TEST_CASE("surface area and bounds") {
  const TriangleMesh b = shapes::box({0, 0, 0}, {1, 2, 3});
  CHECK(b.surface_area() == doctest::Approx(22.0).epsilon(1e-14));
  CHECK(b.bounds().hi == Vec3(1, 2, 3));
}
