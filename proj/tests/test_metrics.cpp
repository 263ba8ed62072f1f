#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geoforge/metrics.hpp"
#include "geoforge/shapes.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace geoforge;

namespace {

PointCloud cloud(std::vector<Vec3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

PointCloud scaled(const PointCloud& c, double s) {
  PointCloud out = c;
  for (Vec3& p : out.points) p *= s;
  return out;
}

double oracle_emd(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> cost(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i][j] = (a.points[i] - b.points[j]).norm();
  }
  return oracle::assignment_cost(cost) / static_cast<double>(n);
}

}  // namespace

TEST_CASE("chamfer: small cases and brute force") {
  const PointCloud a = cloud({{0, 0, 0}});
  const PointCloud b = cloud({{1, 0, 0}});
  CHECK(chamfer(a, b) == 2.0);
  CHECK(chamfer(a, a) == 0.0);
  for (unsigned seed = 1; seed <= 3; ++seed) {
    const PointCloud x = cloud(oracle::random_points(512, seed));
    const PointCloud y = cloud(oracle::random_points(512, seed + 100, -0.5, 1.2));
    const double expect = oracle::chamfer(x.points, y.points);
    CHECK(std::abs(chamfer(x, y) - expect) <= 1e-12);
    CHECK(chamfer(x, y) == chamfer(y, x));
    CHECK(chamfer(scaled(x, 3), scaled(y, 3)) == doctest::Approx(9 * chamfer(x, y)).epsilon(1e-12));
  }
  // Uneven sizes and clustered points stress the spatial grid.
  const PointCloud dense = cloud(oracle::random_points(700, 9, 0.0, 0.01));
  const PointCloud wide = cloud(oracle::random_points(50, 10, -5, 5));
  CHECK(std::abs(chamfer(dense, wide) - oracle::chamfer(dense.points, wide.points)) <= 1e-12);
  CHECK_THROWS_AS(chamfer(a, PointCloud{}), InvalidArgument);
}

TEST_CASE("chamfer is zero exactly for equal sets") {
  auto pts = oracle::random_points(100, 2);
  PointCloud x = cloud(pts);
  std::reverse(pts.begin(), pts.end());
  CHECK(chamfer(x, cloud(pts)) == 0.0);
  pts[0].x() += 1e-6;
  CHECK(chamfer(x, cloud(pts)) > 0.0);
}

TEST_CASE("f-score: identities and brute force") {
  const PointCloud x = cloud(oracle::random_points(512, 4));
  const PointCloud y = cloud(oracle::random_points(512, 5));
  CHECK(f_score(x, x, 1e-9) == 1.0);
  CHECK(f_score(x, cloud({{10, 10, 10}}), 0.5) == 0.0);
  for (double d : {0.02, 0.1, 0.25}) {
    const double f = f_score(x, y, d);
    CHECK(std::abs(f - oracle::f_score(x.points, y.points, d)) <= 1e-12);
    CHECK(f == f_score(y, x, d));
    CHECK(f_score(scaled(x, 2), scaled(y, 2), 2 * d) == doctest::Approx(f).epsilon(1e-12));
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }
  CHECK_THROWS_AS(f_score(x, y, 0.0), InvalidArgument);
}

TEST_CASE("emd: identities, oracle, symmetry and triangle inequality") {
  const PointCloud two = cloud({{0, 0, 0}, {1, 0, 0}});
  const PointCloud swapped = cloud({{1, 0, 0}, {0, 0, 0}});
  CHECK(emd_exact(two, swapped) == 0.0);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const PointCloud a = cloud(oracle::random_points(64, seed));
    const PointCloud b = cloud(oracle::random_points(64, seed + 50));
    const PointCloud c = cloud(oracle::random_points(64, seed + 90, 0, 2));
    const double ab = emd_exact(a, b);
    CHECK(std::abs(ab - oracle_emd(a, b)) <= 1e-9);
    CHECK(std::abs(ab - emd_exact(b, a)) <= 1e-12);
    CHECK(emd_exact(a, c) <= ab + emd_exact(b, c) + 1e-9);
    CHECK(emd_exact(scaled(a, 2), scaled(b, 2)) == doctest::Approx(2 * ab).epsilon(1e-12));
    CHECK(emd_exact(a, a) == 0.0);
  }
  CHECK_THROWS_AS(emd_exact(two, cloud({{0, 0, 0}})), InvalidArgument);
  const PointCloud big = cloud(oracle::random_points(kMaxEmdPoints + 1, 1));
  CHECK_THROWS_AS(emd_exact(big, big), InvalidArgument);
}

TEST_CASE("voxel IoU identities") {
  std::vector<std::uint8_t> full(64, 1), half(64, 0), other(64, 0), empty(64, 0);
  for (std::size_t i = 0; i < 32; ++i) half[i] = 1;
  for (std::size_t i = 32; i < 64; ++i) other[i] = 1;
  const VoxelGrid f(4, full), h(4, half), o(4, other), e(4, empty);
  CHECK(voxel_iou(f, f) == 1.0);
  CHECK(voxel_iou(h, o) == 0.0);
  CHECK(voxel_iou(h, f) == 0.5);
  CHECK(voxel_iou(f, h) == 0.5);
  CHECK(voxel_iou(e, e) == 1.0);
  CHECK_THROWS_AS(voxel_iou(f, VoxelGrid(2, std::vector<std::uint8_t>(8, 1))), InvalidArgument);
  CHECK_THROWS_AS(VoxelGrid(4, std::vector<std::uint8_t>(10, 1)), InvalidArgument);
}

TEST_CASE("volume conservation") {
  RemeshResult same;
  same.mesh = shapes::icosphere(0.5, 2);
  same.normalized_input = same.mesh;
  CHECK(volume_conservation(same.mesh, same) == doctest::Approx(1.0).epsilon(1e-14));

  RemeshConfig cfg;
  cfg.grid_res = 48;
  cfg.directions = 32;
  const RemeshResult sphere = remesh_watertight(shapes::icosphere(1, 3), cfg);
  CHECK(volume_conservation(shapes::icosphere(1, 3), sphere) == doctest::Approx(1.0).epsilon(0.03));

  // Non-watertight input: reference is the labelled interior. Its per-axis
  // lattice error is up to one spacing, so use a finer grid here.
  cfg.grid_res = 128;
  const std::vector<shapes::FaceRect> slits = {{-0.3, -0.28, -0.4, 0.4}, {0.28, 0.3, -0.4, 0.4}};
  const TriangleMesh slit = shapes::box_with_holes({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}, 2, true, slits);
  const RemeshResult sealed = remesh_watertight(slit, cfg);
  const double ratio = volume_conservation(slit, sealed);
  CHECK(ratio >= 0.95);
  CHECK(ratio <= 1.05);

  RemeshResult broken = same;
  broken.mesh = shapes::open_box({0, 0, 0}, {1, 1, 1});
  CHECK_THROWS_AS(volume_conservation(same.mesh, broken), InvalidArgument);

  // A sheet sealed by the shell has no labelled interior to compare with.
  cfg.grid_res = 32;
  cfg.shell_epsilon = 1.5;
  const TriangleMesh flat = shapes::sheet(-1, 1, -0.5, 0.5, 0);
  const RemeshResult shelled = remesh_watertight(flat, cfg);
  CHECK(reference_volume(flat, shelled) == 0.0);
  CHECK_THROWS_AS(volume_conservation(flat, shelled), InvalidArgument);
}

TEST_CASE("report serialisation") {
  MetricReport r;
  r.cd = 0.5;
  r.voxel_iou = 0.25;
  r.params.fscore_threshold = 0.02;
  const auto j = r.to_json();
  CHECK(j["emd"].is_null());
  CHECK(j["cd"] == 0.5);
  CHECK(j["params"]["fscore_threshold"] == 0.02);
  CHECK(r.to_kv().find("emd=none") != std::string::npos);
  r.emd = 0.1;
  CHECK(r.to_json()["emd"] == 0.1);
  CHECK(j["volume_ratio"].is_null());
  CHECK(r.to_kv().find("volume_ratio=none") != std::string::npos);
}
