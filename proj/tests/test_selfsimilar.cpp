#include "doctest.h"

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "metrifract/gauge.hpp"
#include "metrifract/report.hpp"
#include "metrifract/selfsimilar.hpp"

using namespace metrifract;

namespace {

IFS cantor_pair() {
  IFS ifs;
  ifs.maps.push_back(Similarity::axis(1.0 / 3.0, {1}, {0.0}));
  ifs.maps.push_back(Similarity::axis(1.0 / 3.0, {1}, {2.0 / 3.0}));
  return ifs;
}

IFS half_maps(size_t count, size_t dim) {
  IFS ifs;
  for (size_t i = 0; i < count; ++i) {
    std::vector<int> perm;
    std::vector<double> tr;
    for (size_t c = 0; c < dim; ++c) {
      perm.push_back(static_cast<int>(c) + 1);
      tr.push_back(static_cast<double>(i) / 100.0);
    }
    ifs.maps.push_back(Similarity::axis(0.5, std::move(perm), std::move(tr)));
  }
  return ifs;
}

IFS sierpinski() {
  IFS ifs;
  ifs.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.0}));
  ifs.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.5, 0.0}));
  ifs.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.5}));
  return ifs;
}

}  // namespace

TEST_CASE("similarities apply signed axis permutations") {
  auto f = Similarity::axis(1.0 / 3.0, {1}, {2.0 / 3.0});
  CHECK(f({1.0})[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f({0.0})[0] == 2.0 / 3.0);

  auto swap_flip = Similarity::axis(0.5, {2, -1}, {0.0, 1.0});
  auto y = swap_flip({0.25, 0.5});
  CHECK(y[0] == 0.25);        // reads source coordinate 1
  CHECK(y[1] == 1.0 - 0.125);  // reads -source coordinate 0
  CHECK(swap_flip.dim() == 2);
  CHECK(swap_flip.axis_mode());
}

TEST_CASE("general similarities apply scaled orthonormal matrices") {
  auto rot = Similarity::general(0.5, {{0.0, -1.0}, {1.0, 0.0}}, {1.0, 0.0});
  auto y = rot({1.0, 0.0});
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.5);
  CHECK_FALSE(rot.axis_mode());
}

TEST_CASE("similarity construction rejects bad input") {
  CHECK_THROWS_AS(Similarity::axis(0.0, {1}, {0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(1.0, {1}, {0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(1.5, {1}, {0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(0.5, {1, 1}, {0.0, 0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(0.5, {0, 2}, {0.0, 0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(0.5, {3}, {0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(0.5, {1}, {0.0, 0.0}), validation_error);
  CHECK_THROWS_AS(Similarity::axis(0.5, {1}, {std::nan("")}), validation_error);
  CHECK_THROWS_AS(Similarity::general(0.5, {{1.0, 0.0}, {0.0, 2.0}}, {0.0, 0.0}),
                  validation_error);
  CHECK_THROWS_AS(Similarity::general(0.5, {{1.0, 1.0}, {0.0, 1.0}}, {0.0, 0.0}),
                  validation_error);
  CHECK_THROWS_AS(Similarity::general(0.5, {{1.0}}, {0.0, 0.0}), validation_error);
  auto f = Similarity::axis(0.5, {1}, {0.0});
  CHECK_THROWS_AS(f({0.0, 0.0}), validation_error);
}

TEST_CASE("IFS validation needs two consistent maps") {
  IFS one;
  one.maps.push_back(Similarity::axis(0.5, {1}, {0.0}));
  CHECK_THROWS_AS(one.validate(), validation_error);

  IFS mixed;
  mixed.maps.push_back(Similarity::axis(0.5, {1}, {0.0}));
  mixed.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.0}));
  CHECK_THROWS_AS(mixed.validate(), validation_error);

  IFS ok = cantor_pair();
  CHECK_NOTHROW(ok.validate());
  CHECK(ok.dim() == 1);
  CHECK(ok.axis_mode());

  ok.open_set = Box{{0.0}, {0.0}};
  CHECK_THROWS_AS(ok.validate(), validation_error);
  ok.open_set = Box{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(ok.validate(), validation_error);
  ok.open_set = Box{{0.0}, {1.0}};
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("IFS files round trip through JSON") {
  const char* path = "/tmp/metrifract_ifs_test.json";
  write_text_file(path,
                  "{\"dim\": 1,\n"
                  " \"maps\": [{\"ratio\": 0.3333333333333333, \"perm\": [1], "
                  "\"translate\": [0.0]},\n"
                  "           {\"ratio\": 0.3333333333333333, \"perm\": [1], "
                  "\"translate\": [0.6666666666666666]}],\n"
                  " \"open_set\": {\"lo\": [0.0], \"hi\": [1.0]}}\n");
  IFS ifs = load_ifs(path);
  CHECK(ifs.maps.size() == 2);
  CHECK(ifs.dim() == 1);
  CHECK(ifs.maps[1].translate()[0] == 0.6666666666666666);
  REQUIRE(ifs.open_set.has_value());
  CHECK(ifs.open_set->hi[0] == 1.0);

  auto rep = osc_check(ifs, *ifs.open_set);
  CHECK(rep.contained);
  CHECK(rep.disjoint);
  CHECK(rep.exact);
}

TEST_CASE("IFS files accept matrix maps and report precise errors") {
  const char* path = "/tmp/metrifract_ifs_matrix_test.json";
  write_text_file(path,
                  "{\"dim\": 2,\n"
                  " \"maps\": [{\"ratio\": 0.5, \"matrix\": [[0, -1], [1, 0]], "
                  "\"translate\": [1.0, 0.0]},\n"
                  "           {\"ratio\": 0.5, \"perm\": [1, 2], "
                  "\"translate\": [0.0, 0.0]}]}\n");
  IFS ifs = load_ifs(path);
  CHECK_FALSE(ifs.axis_mode());
  CHECK(ifs.maps[0].matrix()[0][1] == -1.0);
  CHECK_FALSE(ifs.open_set.has_value());

  CHECK_THROWS_AS(load_ifs("/tmp/metrifract_missing_ifs.json"), io_error);
  const char* bad = "/tmp/metrifract_ifs_bad_test.json";
  write_text_file(bad, "{ not json");
  CHECK_THROWS_AS(load_ifs(bad), io_error);
  write_text_file(bad, "{\"dim\": 1}");
  CHECK_THROWS_AS(load_ifs(bad), io_error);
  write_text_file(bad,
                  "{\"dim\": 1, \"maps\": [{\"ratio\": 2.0, \"perm\": [1], "
                  "\"translate\": [0.0]}, {\"ratio\": 0.5, \"perm\": [1], "
                  "\"translate\": [0.0]}]}");
  CHECK_THROWS_AS(load_ifs(bad), validation_error);
}

TEST_CASE("similarity dimension solves the ratio equation") {
  CHECK(moran_dimension(cantor_pair()) ==
        doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-10));
  CHECK(moran_dimension(half_maps(2, 1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(moran_dimension(half_maps(4, 1)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(moran_dimension(half_maps(8, 1)) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(moran_dimension(half_maps(3, 1)) ==
        doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("similarity dimension depends only on the ratio list") {
  IFS a;
  a.maps.push_back(Similarity::axis(0.5, {1}, {0.0}));
  a.maps.push_back(Similarity::axis(0.25, {1}, {0.75}));
  IFS b;
  b.maps.push_back(Similarity::axis(0.5, {1, 2, 3}, {0.0, 0.0, 0.0}));
  b.maps.push_back(Similarity::axis(0.25, {2, -1, 3}, {0.5, 0.5, 0.5}));

  // 2^-s + 4^-s = 1 solves to s = log2 of the golden ratio
  const double golden = std::log((1.0 + std::sqrt(5.0)) / 2.0) / std::log(2.0);
  CHECK(moran_dimension(a) == doctest::Approx(golden).epsilon(1e-10));
  CHECK(moran_dimension(b) == doctest::Approx(moran_dimension(a)).epsilon(1e-12));

  IFS c;
  c.maps.push_back(Similarity::axis(0.5, {1}, {0.0}));
  c.maps.push_back(Similarity::axis(0.3, {1}, {0.2}));
  c.maps.push_back(Similarity::axis(0.1, {1}, {0.9}));
  double s = moran_dimension(c);
  double residual = std::pow(0.5, s) + std::pow(0.3, s) + std::pow(0.1, s) - 1.0;
  CHECK(std::fabs(residual) <= 1e-10);
}

TEST_CASE("attractor samples enumerate words in label order") {
  auto sample = attractor_points(cantor_pair(), 2);
  REQUIRE(sample.size() == 4);
  CHECK(sample.depth == 2);
  CHECK(sample.dim == 1);
  CHECK(sample.map_count == 2);
  CHECK(sample.point(0)[0] == 0.0);
  CHECK(sample.point(1)[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
  CHECK(sample.point(2)[0] == 2.0 / 3.0);
  CHECK(sample.point(3)[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  CHECK(sample.label(0) == "00");
  CHECK(sample.label(1) == "01");
  CHECK(sample.label(2) == "10");
  CHECK(sample.label(3) == "11");

  auto root = attractor_points(cantor_pair(), 0);
  CHECK(root.size() == 1);
  CHECK(root.label(0) == "");
  CHECK(root.point(0)[0] == 0.0);
}

TEST_CASE("attractor labels use digits then letters then commas") {
  auto twelve = attractor_points(half_maps(12, 1), 1);
  CHECK(twelve.label(9) == "9");
  CHECK(twelve.label(10) == "a");
  CHECK(twelve.label(11) == "b");

  auto many = attractor_points(half_maps(37, 1), 1);
  CHECK(many.label(36) == "36");
  CHECK(many.label(0) == "0");

  auto base3 = attractor_points(sierpinski(), 2);
  CHECK(base3.label(5) == "12");
  CHECK(base3.label(8) == "22");
}

TEST_CASE("attractor expansion satisfies the map recursion exactly") {
  IFS ifs = cantor_pair();
  auto sample3 = attractor_points(ifs, 3);
  auto sample4 = attractor_points(ifs, 4);
  const size_t block = sample3.size();
  for (size_t i = 0; i < ifs.maps.size(); ++i)
    for (size_t q = 0; q < block; ++q) {
      auto expect = ifs.maps[i](sample3.point(q));
      CHECK(sample4.point(i * block + q)[0] == expect[0]);
    }
}

TEST_CASE("attractor base point solves the fixed point equation") {
  IFS flip;
  flip.maps.push_back(Similarity::axis(0.5, {-1}, {0.75}));
  flip.maps.push_back(Similarity::axis(0.5, {1}, {0.0}));
  auto s = attractor_points(flip, 0);
  CHECK(s.point(0)[0] == doctest::Approx(0.5).epsilon(1e-12));

  IFS rot;
  rot.maps.push_back(
      Similarity::general(0.5, {{0.0, -1.0}, {1.0, 0.0}}, {1.0, 0.0}));
  rot.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.0}));
  auto r = attractor_points(rot, 0);
  CHECK(r.point(0)[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.point(0)[1] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("attractor sampling enforces the point budget") {
  CHECK_THROWS_AS(attractor_points(cantor_pair(), 24), validation_error);
  CHECK_THROWS_AS(attractor_points(cantor_pair(), -1), validation_error);
  CHECK_NOTHROW(attractor_points(cantor_pair(), 10));
}

TEST_CASE("attractor sampling is thread deterministic") {
  auto a = attractor_points(sierpinski(), 6, 1);
  auto b = attractor_points(sierpinski(), 6, 4);
  CHECK(a.coords == b.coords);
}

TEST_CASE("open set condition certifies standard examples") {
  Box unit1{{0.0}, {1.0}};
  auto cantor = osc_check(cantor_pair(), unit1);
  CHECK(cantor.contained);
  CHECK(cantor.disjoint);
  CHECK(cantor.exact);

  IFS quadrants;
  quadrants.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.0}));
  quadrants.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.5, 0.0}));
  quadrants.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.5}));
  quadrants.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.5, 0.5}));
  Box unit2{{0.0, 0.0}, {1.0, 1.0}};
  auto quad = osc_check(quadrants, unit2);
  CHECK(quad.contained);
  CHECK(quad.disjoint);
  CHECK(quad.exact);

  // dyadic ratio and shift so the exact interval images land exactly on [0,1]
  IFS overlap;
  overlap.maps.push_back(Similarity::axis(0.875, {1}, {0.0}));
  overlap.maps.push_back(Similarity::axis(0.875, {1}, {0.125}));
  auto bad = osc_check(overlap, unit1);
  CHECK(bad.contained);
  CHECK_FALSE(bad.disjoint);
  CHECK(bad.exact);
}

TEST_CASE("open set condition degrades to bounding boxes for matrix maps") {
  IFS rot;
  rot.maps.push_back(
      Similarity::general(0.5, {{0.0, -1.0}, {1.0, 0.0}}, {0.5, 0.0}));
  rot.maps.push_back(Similarity::axis(0.5, {1, 2}, {0.0, 0.5}));
  Box unit2{{0.0, 0.0}, {1.0, 1.0}};
  auto rep = osc_check(rot, unit2);
  CHECK_FALSE(rep.exact);
  // image boxes [0,.5]x[0,.5] and [0,.5]x[.5,1] touch along one edge only
  CHECK(rep.contained);
  CHECK(rep.disjoint);

  CHECK_THROWS_AS(osc_check(rot, Box{{0.0}, {1.0}}), validation_error);
  CHECK_THROWS_AS(osc_check(rot, Box{{0.0, 0.0}, {1.0, 0.0}}), validation_error);
}

TEST_CASE("box counting recovers plane and segment dimensions") {
  Rng rng(7);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back({rng.u01(), rng.u01()});
  auto cloud = PointCloud::from_points(pts);
  std::vector<double> grid{0.25, 0.125, 0.0625, 0.03125};
  auto series = box_dimension(cloud, grid);
  CHECK(series.slope == doctest::Approx(2.0).epsilon(0.05));
  CHECK(series.count[0] == 16);
  CHECK(series.count[1] == 64);

  std::set<std::pair<long long, long long>> cells;
  for (const auto& p : pts)
    cells.insert({static_cast<long long>(std::floor(p[0] / 0.125)),
                  static_cast<long long>(std::floor(p[1] / 0.125))});
  CHECK(series.count[1] == cells.size());

  std::vector<std::vector<double>> seg;
  for (int i = 0; i < 1000; ++i) seg.push_back({i / 999.0, 0.0});
  auto segs = box_dimension(PointCloud::from_points(seg),
                            {0.125, 0.0625, 0.03125, 0.015625});
  CHECK(segs.slope == doctest::Approx(1.0).epsilon(0.1));

  auto flat = box_dimension(PointCloud::from_points({{0.3, 0.7}}), {0.5, 0.25});
  CHECK(flat.slope == 0.0);
  CHECK(flat.count[0] == 1);
  CHECK(flat.count[1] == 1);
}

TEST_CASE("box counting matches the exact cell count on a triangle sample") {
  auto cloud = attractor_points(sierpinski(), 6).cloud();
  std::vector<double> grid;
  for (int k = 1; k <= 5; ++k) grid.push_back(std::ldexp(1.0, -k));
  auto series = box_dimension(cloud, grid, 2);
  size_t expect = 3;
  for (size_t i = 0; i < grid.size(); ++i, expect *= 3)
    CHECK(series.count[i] == expect);
  CHECK(series.slope ==
        doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-9));

  auto st = box_dimension(cloud, grid, 4);
  CHECK(st.count == series.count);
}

TEST_CASE("box counting rejects degenerate grids") {
  auto cloud = PointCloud::from_points({{0.0}, {1.0}});
  CHECK_THROWS_AS(box_dimension(cloud, {0.5}), validation_error);
  CHECK_THROWS_AS(box_dimension(cloud, {0.5, 0.5}), validation_error);
  CHECK_THROWS_AS(box_dimension(cloud, {0.5, 0.0}), validation_error);
  CHECK_THROWS_AS(box_dimension(cloud, {0.5, -0.25}), validation_error);
  auto matrix = PointCloud::from_matrix({{0.0, 1.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(box_dimension(matrix, {0.5, 0.25}), validation_error);
}

TEST_CASE("premeasure bound charges clusters and skips singletons") {
  auto g = Gauge::pow(1.0);
  auto lone = hausdorff_premeasure_upper(PointCloud::from_points({{0.4}}), g, 0.5);
  CHECK(lone.upper_bound == 0.0);
  CHECK(lone.clusters == 1);
  CHECK(lone.max_diameter == 0.0);

  auto far = hausdorff_premeasure_upper(
      PointCloud::from_points({{0.0}, {1.0}}), g, 0.5);
  CHECK(far.upper_bound == 0.0);
  CHECK(far.clusters == 2);

  auto near = hausdorff_premeasure_upper(
      PointCloud::from_points({{0.0}, {0.2}}), g, 0.5);
  CHECK(near.clusters == 1);
  CHECK(near.max_diameter == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(near.upper_bound == doctest::Approx(0.2).epsilon(1e-15));

  CHECK_THROWS_AS(hausdorff_premeasure_upper(
                      PointCloud::from_points({{0.0}}), g, 0.0),
                  validation_error);
  CHECK_THROWS_AS(hausdorff_premeasure_upper(
                      PointCloud::from_points({{0.0}}), g, -1.0),
                  validation_error);
}

TEST_CASE("premeasure bound tracks the middle thirds set across scales") {
  const int p = 6;
  auto cloud = attractor_points(cantor_pair(), p).cloud();
  const double s = std::log(2.0) / std::log(3.0);
  auto g = Gauge::pow(s);

  // delta below the minimal spacing: every cluster is a singleton
  auto fine = hausdorff_premeasure_upper(cloud, g, std::pow(3.0, -p));
  CHECK(fine.upper_bound == 0.0);
  CHECK(fine.clusters == 64);

  // delta wide enough to pair sibling endpoints but nothing further
  auto paired = hausdorff_premeasure_upper(cloud, g, 5.0 * std::pow(3.0, -p));
  CHECK(paired.clusters == 32);
  CHECK(paired.max_diameter ==
        doctest::Approx(2.0 * std::pow(3.0, -p)).epsilon(1e-12));
  CHECK(paired.upper_bound == doctest::Approx(std::pow(2.0, s - 1.0)).epsilon(1e-9));
}
