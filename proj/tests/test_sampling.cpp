#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geoforge/occs.hpp"
#include "geoforge/random.hpp"
#include "geoforge/sampling.hpp"
#include "geoforge/shapes.hpp"
#include "geoforge/watertight.hpp"
#include "oracles.hpp"

#include <cmath>
#include <set>

using namespace geoforge;

namespace {

bool float_exact(const Vec3& p) {
  for (int a = 0; a < 3; ++a) {
    if (static_cast<double>(static_cast<float>(p[a])) != p[a]) return false;
  }
  return true;
}

std::vector<Vec3> to_float(std::vector<Vec3> pts) {
  for (Vec3& p : pts) p = p.cast<float>().cast<double>();
  return pts;
}

}  // namespace

TEST_CASE("surface samples lie on the mesh, follow area and repeat per seed") {
  // Two triangles with areas 1 and 3.
  const std::vector<Vec3> v = {{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1}, {3, 0, 1}, {0, 2, 1}};
  const TriangleMesh m(v, {{0, 1, 2}, {3, 4, 5}});
  const PointCloud a = sample_surface(m, 8192, 11);
  CHECK(a.size() == 8192);
  std::size_t upper = 0;
  for (const Vec3& p : a.points) {
    CHECK(oracle::mesh_distance(m, p) < 1e-12);
    upper += p.z() > 0.5;
  }
  CHECK(static_cast<double>(upper) / a.size() == doctest::Approx(0.75).epsilon(0.03));
  CHECK(sample_surface(m, 8192, 11).points == a.points);
  CHECK(sample_surface(m, 8192, 12).points != a.points);
  // Nonstandard sizes still work.
  CHECK(sample_surface(m, 1000, 1).size() == 1000);
  CHECK_THROWS_AS(sample_surface(TriangleMesh{}, 2048, 1), InvalidArgument);

  // Uniform within a triangle: the barycentre of the samples approaches the
  // centroid.
  const PointCloud lower = sample_surface(TriangleMesh(v, {{0, 1, 2}}), 8192, 3);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : lower.points) mean += p;
  mean /= lower.size();
  CHECK((mean - Vec3(2.0 / 3.0, 1.0 / 3.0, 0)).norm() < 0.02);
}

TEST_CASE("farthest point sampling matches the greedy oracle") {
  PointCloud cloud;
  cloud.points = oracle::random_points(600, 4);
  // Duplicates exercise the tie rule.
  for (int i = 0; i < 20; ++i) cloud.points.push_back(cloud.points[static_cast<std::size_t>(i * 7)]);
  for (std::uint64_t seed : {1ull, 99ull}) {
    const PointCloud down = fps_downsample(cloud, 120, seed);
    const auto start = static_cast<std::size_t>(Rng(seed).below(cloud.size()));
    const auto expect = oracle::fps(cloud.points, 120, start);
    REQUIRE(down.size() == 120);
    for (std::size_t k = 0; k < 120; ++k) CHECK(down.points[k] == cloud.points[expect[k]]);
  }
  CHECK(fps_downsample(cloud, 0, 1).size() == 0);
  CHECK_THROWS_AS(fps_downsample(cloud, 621, 1), InvalidArgument);
}

TEST_CASE("random downsampling picks distinct points") {
  PointCloud cloud;
  cloud.points = oracle::random_points(500, 6);
  const PointCloud down = random_downsample(cloud, 125, 2);
  std::set<std::tuple<double, double, double>> seen;
  for (const Vec3& p : down.points) {
    seen.insert({p.x(), p.y(), p.z()});
    CHECK(std::find(cloud.points.begin(), cloud.points.end(), p) != cloud.points.end());
  }
  CHECK(seen.size() == 125);
  CHECK(random_downsample(cloud, 125, 2).points == down.points);
}

TEST_CASE("queries: counts, float positions and labels from the signed grid") {
  RemeshConfig cfg;
  cfg.grid_res = 32;
  cfg.directions = 16;
  const SignedField field = compute_signed_field(shapes::icosphere(1.0, 3), cfg);
  const PointCloud surface = sample_surface(field.normalized_input, 2048, 5);
  SamplingSpec spec;
  spec.uniform_queries = 3000;
  spec.near_queries = 1000;
  spec.near_sigma = 0.01;
  spec.seed = 7;
  const QuerySet q = sample_queries(field.signed_grid, surface, spec);
  REQUIRE(q.queries.size() == 4000);
  CHECK(q.labels.size() == 4000);
  CHECK(q.near_fraction == doctest::Approx(0.25));
  CHECK(q.sigma == 0.01);
  const double radius = field.normalized_input.bounds().extent().x() / 2;
  std::size_t inside_uniform = 0;
  for (std::size_t i = 0; i < q.queries.size(); ++i) {
    const Vec3& p = q.queries[i];
    CHECK(float_exact(p));
    CHECK(p.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(q.labels[i] == (query_inside(field.signed_grid, p, 0.0) ? 1 : 0));
    CHECK(q.near_flags[i] == (i >= 3000 ? 1 : 0));
    if (i >= 3000) CHECK(std::abs(p.norm() - radius) < 0.08);
    if (i < 3000) inside_uniform += q.labels[i];
  }
  // Fraction of the cube inside the ball.
  const double expected = 4.0 / 3.0 * 3.14159265 * radius * radius * radius / 8.0;
  CHECK(static_cast<double>(inside_uniform) / 3000 == doctest::Approx(expected).epsilon(0.15));
  CHECK(sample_queries(field.signed_grid, surface, spec).queries == q.queries);
}

TEST_CASE("voxel16 occupancy of a solid ball") {
  const Vec3 c(0.1, -0.05, 0.02);
  const double r = 0.5;
  RemeshConfig cfg;
  cfg.grid_res = 33;
  cfg.directions = 16;
  const TriangleMesh ball = shapes::icosphere(r, 4, c);
  const TriangleBvh bvh(ball);
  const LabelGrid labels = compute_visibility_labels(bvh, 33, 16, 0.0);
  const ConditionPayload vox = voxelize16(ball, &labels);
  REQUIRE(vox.voxels.size() == 4096);
  CHECK(vox.length() == 4096);
  std::size_t occupied = 0;
  for (auto v : vox.voxels) occupied += v;
  CHECK(occupied >= oracle::ball_cells16(c, r - 0.01));
  CHECK(occupied <= oracle::ball_cells16(c, r + 0.01));

  // Without labels only the shell is marked; the centre cell stays empty.
  const ConditionPayload shell = voxelize16(ball);
  const int ci = static_cast<int>((c.x() + 1) * 8), cj = static_cast<int>((c.y() + 1) * 8),
            ck = static_cast<int>((c.z() + 1) * 8);
  CHECK(shell.voxels[static_cast<std::size_t>(ci + 16 * (cj + 16 * ck))] == 0);
  CHECK(vox.voxels[static_cast<std::size_t>(ci + 16 * (cj + 16 * ck))] == 1);
}

TEST_CASE("triangle/box overlap") {
  Aabb box;
  box.lo = Vec3(0, 0, 0);
  box.hi = Vec3(1, 1, 1);
  CHECK(triangle_box_overlap({0.5, 0.5, 0.5}, {3, 0.5, 0.5}, {0.5, 3, 0.5}, box));
  CHECK(triangle_box_overlap({-1, -1, 0.5}, {3, -1, 0.5}, {-1, 3, 0.5}, box));
  CHECK_FALSE(triangle_box_overlap({2, 2, 2}, {3, 2, 2}, {2, 3, 2}, box));
  // Diagonal plane passing just beyond a corner.
  CHECK_FALSE(triangle_box_overlap({3.1, 0, 0}, {0, 3.1, 0}, {0, 0, 3.1}, box));
  CHECK(triangle_box_overlap({2.9, 0, 0}, {0, 2.9, 0}, {0, 0, 2.9}, box));
}

TEST_CASE("bbox corners, sparse cloud and partial payload") {
  const TriangleMesh b = shapes::box({-0.5, -0.25, 0}, {0.5, 0.25, 0.75});
  const ConditionPayload bb = bbox_corners(b);
  REQUIRE(bb.corners.size() == 8);
  CHECK(bb.corners[0] == Vec3(-0.5, -0.25, 0));
  CHECK(bb.corners[1] == Vec3(0.5, -0.25, 0));
  CHECK(bb.corners[2] == Vec3(-0.5, 0.25, 0));
  CHECK(bb.corners[7] == Vec3(0.5, 0.25, 0.75));

  const ConditionPayload sparse = sparse_cloud(b, 3);
  CHECK(sparse.length() == 512);

  Aabb cut;
  cut.lo = Vec3(-1, -1, -1);
  cut.hi = Vec3(0, 1, 1);
  const ConditionPayload part = make_partial(b, cut, 4);
  CHECK(part.length() == 2056);
  CHECK(part.points.size() == 2048);
  for (const Vec3& p : part.points) CHECK_FALSE(cut.contains(p));
  CHECK(part.corners == box_corners(cut));

  Aabb all;
  all.lo = Vec3::Constant(-2);
  all.hi = Vec3::Constant(2);
  CHECK_THROWS_AS(make_partial(b, all, 4), InvalidArgument);
}

TEST_CASE("clipped surface area") {
  const TriangleMesh b = shapes::box({0, 0, 0}, {1, 1, 1});
  Aabb lower;
  lower.lo = Vec3(-1, -1, -1);
  lower.hi = Vec3(2, 2, 0.5);
  CHECK(surface_area_in_box(b, lower) == doctest::Approx(3.0).epsilon(1e-12));
  Aabb corner;
  corner.lo = Vec3(0.5, 0.5, 0.5);
  corner.hi = Vec3(2, 2, 2);
  CHECK(surface_area_in_box(b, corner) == doctest::Approx(0.75).epsilon(1e-12));
  const TriangleMesh s = shapes::icosphere(0.6, 3);
  Aabb half;
  half.lo = Vec3(0, -1, -1);
  half.hi = Vec3(1, 1, 1);
  CHECK(surface_area_in_box(s, half) == doctest::Approx(s.surface_area() / 2).epsilon(1e-9));
}

TEST_CASE("extension boxes cover 10-40% of the bounds and stay inside") {
  Aabb bounds;
  bounds.lo = Vec3(-1, -0.5, -0.2);
  bounds.hi = Vec3(1, 0.5, 0.7);
  const double total = bounds.extent().prod();
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Aabb box = random_extension_box(bounds, seed);
    const double f = box.extent().prod() / total;
    CHECK(f >= 0.1 - 1e-12);
    CHECK(f <= 0.4 + 1e-12);
    CHECK(bounds.contains(box));
  }
}

TEST_CASE("sampling spec validation") {
  SamplingSpec s;
  CHECK_NOTHROW(s.validate());
  s.surface_sizes = {2050};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.surface_sizes = {};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = SamplingSpec{};
  s.near_sigma = -1;
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("OCCS round trip, section table and truncation") {
  SampleContainer c;
  c.asset_hash = hash_string("chair_01");
  PointCloud surf;
  surf.points = to_float(oracle::random_points(2048, 1));
  PointCloud down;
  down.points = to_float(oracle::random_points(512, 2));
  c.surfaces = {surf};
  c.downsamples = {down};
  c.queries.queries = to_float(oracle::random_points(100, 3));
  for (int i = 0; i < 100; ++i) {
    c.queries.labels.push_back(i % 3 == 0);
    c.queries.near_flags.push_back(i >= 60);
  }
  c.queries.near_fraction = 0.4;
  ConditionPayload vox;
  vox.kind = PayloadKind::voxel16;
  vox.voxels.assign(4096, 0);
  vox.voxels[17] = 1;
  ConditionPayload bb;
  bb.kind = PayloadKind::bbox8;
  bb.corners = to_float(oracle::random_points(8, 4));
  ConditionPayload sp;
  sp.kind = PayloadKind::sparse512;
  sp.points = to_float(oracle::random_points(512, 5));
  ConditionPayload part;
  part.kind = PayloadKind::partial2056;
  part.points = to_float(oracle::random_points(2048, 6));
  part.corners = to_float(oracle::random_points(8, 7));
  c.payloads = {vox, bb, sp, part};

  const std::string bytes = encode_occs(c);
  CHECK(bytes.substr(0, 4) == "OCCS");
  std::uint64_t hash = 0;
  const auto table = read_occs_table(bytes, &hash);
  CHECK(hash == c.asset_hash);
  std::vector<std::string> tags;
  for (const auto& s : table) tags.push_back(s.tag);
  CHECK(tags == std::vector<std::string>{"SURF", "DOWN", "QPOS", "QLAB", "QNEA", "VX16", "BBX8", "SPRS", "PART"});
  CHECK(table[0].count == 2048);
  CHECK(table[0].bytes == 2048 * 12);
  CHECK(table.back().count == 2056);
  CHECK(table.back().aux == 8);

  const SampleContainer back = decode_occs(bytes);
  CHECK(back.asset_hash == c.asset_hash);
  CHECK(back.surfaces[0].points == surf.points);
  CHECK(back.downsamples[0].points == down.points);
  CHECK(back.queries.queries == c.queries.queries);
  CHECK(back.queries.labels == c.queries.labels);
  CHECK(back.queries.near_flags == c.queries.near_flags);
  CHECK(back.queries.near_fraction == doctest::Approx(0.4));
  REQUIRE(back.payloads.size() == 4);
  CHECK(back.payloads[0].voxels == vox.voxels);
  CHECK(back.payloads[1].corners == bb.corners);
  CHECK(back.payloads[2].points == sp.points);
  CHECK(back.payloads[3].points == part.points);
  CHECK(back.payloads[3].corners == part.corners);
  CHECK(encode_occs(back) == bytes);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{20}, std::size_t{100}, bytes.size() / 2,
                          bytes.size() - 1}) {
    CHECK_THROWS_AS(decode_occs(std::string_view(bytes).substr(0, cut)), IoError);
  }
  CHECK_THROWS_AS(decode_occs(bytes + "x"), IoError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_occs(bad), IoError);
}
