#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "geoforge/shapes.hpp"
#include "geoforge/watertight.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>

using namespace geoforge;

TEST_CASE("probe directions are unit, distinct and balanced") {
  for (int d : {6, 16, 64, 100}) {
    const auto dirs = fibonacci_directions(d);
    REQUIRE(dirs.size() == static_cast<std::size_t>(d));
    Vec3 sum = Vec3::Zero();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      CHECK(std::abs(dirs[i].norm() - 1.0) < 1e-14);
      for (std::size_t j = 0; j < i; ++j) CHECK((dirs[i] - dirs[j]).norm() > 1e-3);
      sum += dirs[i];
    }
    CHECK(sum.norm() / d < 0.1);
  }
  CHECK(fibonacci_directions(64) == fibonacci_directions(64));
}

TEST_CASE("unsigned distance grid equals brute force") {
  const TriangleMesh m = oracle::random_soup(60, 4);
  const TriangleBvh bvh(m);
  const ScalarGrid udf = compute_udf_grid(bvh, 12);
  CHECK(udf.kind == GridKind::udf);
  const GridShape s = udf.shape;
  for (int k = 0; k < 12; ++k) {
    for (int j = 0; j < 12; ++j) {
      for (int i = 0; i < 12; ++i) {
        CHECK(std::abs(udf.at(i, j, k) - oracle::mesh_distance(m, s.point(i, j, k))) <= 1e-12);
      }
    }
  }
}

TEST_CASE("visibility labels agree with the winding number away from the surface") {
  const std::vector<TriangleMesh> parts = {shapes::torus(0.5, 0.2, 24, 12),
                                           shapes::box({-0.2, -0.2, -0.8}, {0.2, 0.2, -0.4})};
  const TriangleMesh m = shapes::merge(parts);
  const TriangleBvh bvh(m);
  const int r = 24;
  const LabelGrid labels = compute_visibility_labels(bvh, r, 32, 0.0);
  const ScalarGrid udf = compute_udf_grid(bvh, r);
  const double h = udf.spacing();
  std::size_t agree = 0, inside = 0;
  for (int k = 0; k < r; ++k) {
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) {
        const std::size_t idx = labels.shape.index(i, j, k);
        const bool expect = std::abs(oracle::winding_number(m, labels.shape.point(i, j, k))) > 0.5;
        const bool got = labels.inside(idx);
        inside += got;
        if (got == expect) {
          ++agree;
        } else {
          CHECK(udf.values[idx] <= 2.0 * h);
        }
      }
    }
  }
  CHECK(inside > 0);
  CHECK(static_cast<double>(agree) / labels.shape.size() >= 0.99);
}

TEST_CASE("escape threshold trades outside for inside monotonically") {
  const TriangleMesh open = shapes::open_box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
  const TriangleBvh bvh(open);
  std::size_t previous = 0;
  for (double tau : {0.0, 0.1, 0.3, 0.6}) {
    const std::size_t n = compute_visibility_labels(bvh, 16, 32, tau).inside_count();
    CHECK(n >= previous);
    previous = n;
  }
  CHECK(compute_visibility_labels(bvh, 16, 32, 0.0).inside_count() == 0);
  CHECK(previous > 0);
}

TEST_CASE("flood fill matches ray labels away from the wall band") {
  const int r = 40;
  const double h = 2.0 / (r - 1);
  // Faces sit 0.3h past grid planes so no grid point lies on the surface.
  const double lo = -1.0 + 8 * h + 0.3 * h, hi = -1.0 + 30 * h + 0.3 * h;
  const TriangleMesh b = shapes::box({lo, lo, lo}, {hi, hi, hi});
  const TriangleBvh bvh(b);
  const ScalarGrid udf = compute_udf_grid(bvh, r);
  const double threshold = 0.35;
  const LabelGrid flood = exterior_flood_fill(udf, threshold);
  const LabelGrid ray = compute_visibility_labels(bvh, r, 16, 0.0);
  CHECK(ray.inside_count() == 22u * 22u * 22u);
  for (std::size_t i = 0; i < udf.values.size(); ++i) {
    if (udf.values[i] > threshold * h) {
      CHECK(flood.labels[i] == ray.labels[i]);
    } else {
      // Wall points are never reached, hence inside.
      CHECK(flood.inside(i));
    }
  }

  // A slit narrower than the threshold band does not let the flood in, while
  // a few probes do see through it.
  const double mid = 0.5 * (lo + hi), span = hi - lo;
  const std::vector<shapes::FaceRect> holes = {{mid - 0.25 * h, mid + 0.25 * h, lo + 0.2 * span, hi - 0.2 * span}};
  const TriangleMesh slit = shapes::box_with_holes({lo, lo, lo}, {hi, hi, hi}, 2, true, holes);
  const TriangleBvh slit_bvh(slit);
  CHECK(exterior_flood_fill(compute_udf_grid(slit_bvh, r), 1.0).inside_count() >= 22u * 22u * 22u);
  CHECK(compute_visibility_labels(slit_bvh, r, 16, 0.0).inside_count() < 22u * 22u * 22u);
}

TEST_CASE("signed synthesis and shell offset") {
  ScalarGrid udf(8, GridKind::udf);
  LabelGrid labels(8);
  for (std::size_t i = 0; i < udf.values.size(); ++i) {
    udf.values[i] = 0.01 * static_cast<double>(i % 17);
    labels.labels[i] = i % 3 == 0 ? Label::inside : Label::outside;
  }
  const ScalarGrid s = synthesize_signed_grid(udf, labels);
  CHECK(s.kind == GridKind::signed_field);
  const double h = udf.spacing();
  const ScalarGrid shell = synthesize_signed_grid(udf, labels, 0.5);
  for (std::size_t i = 0; i < udf.values.size(); ++i) {
    if (labels.inside(i)) {
      CHECK(s.values[i] == -udf.values[i]);
      CHECK(shell.values[i] == -udf.values[i]);
    } else {
      CHECK(s.values[i] == udf.values[i]);
      CHECK(shell.values[i] == doctest::Approx(udf.values[i] - 0.5 * h).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(synthesize_signed_grid(udf, LabelGrid(9)), InvalidArgument);
}

TEST_CASE("remeshing a closed sphere keeps its volume and seals the output") {
  RemeshConfig cfg;
  cfg.grid_res = 48;
  cfg.directions = 16;
  const TriangleMesh s = shapes::icosphere(1.0, 3);
  const RemeshResult r = remesh_watertight(s, cfg);
  CHECK(is_watertight(r.mesh).watertight);
  CHECK(r.margin >= cfg.margin);
  CHECK(r.label_grid.resolution() == 48);
  const double input_volume = mesh_volume(r.normalized_input);
  CHECK(r.stats.output_volume == doctest::Approx(input_volume).epsilon(0.03));
  CHECK(r.stats.output_volume == doctest::Approx(mesh_volume(r.mesh)));
  // Grid boundary layer is always outside.
  const GridShape g = r.label_grid.shape;
  for (int k = 0; k < 48; k += 47) {
    for (int j = 0; j < 48; ++j) {
      for (int i = 0; i < 48; ++i) CHECK_FALSE(r.label_grid.inside(g.index(i, j, k)));
    }
  }
}

TEST_CASE("open geometry: empty output without a shell, sealed sheet with one") {
  RemeshConfig cfg;
  cfg.grid_res = 32;
  cfg.directions = 64;
  CHECK_THROWS_WITH_AS(remesh_watertight(shapes::open_box({0, 0, 0}, {1, 1, 1}), cfg),
                       doctest::Contains("empty output"), GeoError);

  cfg.shell_epsilon = 1.0;
  const RemeshResult sheet = remesh_watertight(shapes::sheet(-1, 1, -1, 1, 0.1), cfg);
  CHECK(is_watertight(sheet.mesh).watertight);
  const double h = 2.0 / 31;
  const double expected = sheet.normalized_input.surface_area() * 2.0 * h;
  CHECK(sheet.stats.output_volume == doctest::Approx(expected).epsilon(0.25));
}

TEST_CASE("configuration is validated") {
  RemeshConfig ok;
  CHECK_NOTHROW(ok.validate());
  auto bad = [](auto edit) {
    RemeshConfig c;
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.grid_res = 4; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.directions = 2; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.escape_threshold = 1.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.escape_threshold = -0.1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.iso_level = -1; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.shell_epsilon = 0.0; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(bad([](RemeshConfig& c) { c.margin = 0.5; }).validate(), InvalidArgument);
  CHECK_THROWS_AS(remesh_watertight(TriangleMesh{}, ok), InvalidArgument);
  CHECK(labeling_mode_from_string(to_string(LabelingMode::exterior_flood_fill)) == LabelingMode::exterior_flood_fill);
  CHECK_THROWS_AS(labeling_mode_from_string("sideways"), InvalidArgument);
}

TEST_CASE("effective margin keeps the outer layer clear") {
  RemeshConfig c;
  c.grid_res = 16;
  const double h = 2.0 / 15;
  CHECK(effective_margin(c) >= 2.0 * h);
  c.grid_res = 512;
  CHECK(effective_margin(c) == c.margin);
}

TEST_CASE("an expired budget aborts remeshing") {
  RemeshConfig cfg;
  cfg.grid_res = 64;
  const Deadline gone(std::chrono::duration<double>(-1.0));
  CHECK_THROWS_AS(remesh_watertight(shapes::icosphere(1, 2), cfg, &gone), BudgetExceeded);
}
