#include "doctest.h"

#include <cmath>
#include <vector>

#include "metrifract/geometry.hpp"
#include "metrifract/util.hpp"

using namespace metrifract;

namespace {

TorusPoint tp(std::vector<double> v) { return TorusPoint{std::move(v)}; }

}  // namespace

TEST_CASE("circle distance basics") {
  CHECK(circle_dist(0.1, 0.9) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(circle_dist(0.4, 0.4) == 0.0);
  CHECK(circle_dist(0.25, 0.75) == 0.5);
  CHECK(circle_dist(0.75, 0.25) == 0.5);
  CHECK_THROWS_AS(circle_dist(1.0, 0.5), validation_error);
  CHECK_THROWS_AS(circle_dist(0.5, -0.1), validation_error);
}

TEST_CASE("circle distance triangle inequality on a lattice") {
  // multiples of 2^-10 keep every reduction exact
  for (int a = 0; a < 32; ++a)
    for (int b = 0; b < 32; ++b)
      for (int c = 0; c < 32; ++c) {
        double x = a / 32.0, y = b / 32.0, z = c / 32.0;
        CHECK(circle_dist(x, z) <= circle_dist(x, y) + circle_dist(y, z));
      }
}

TEST_CASE("block schedule parsing") {
  auto s = BlockSchedule::parse("list:1,1,1", 2);
  CHECK(s.total() == 3);
  CHECK(s.level_of(0) == 0);
  CHECK(s.level_of(2) == 2);
  CHECK(s.weight(2) == 0.25);

  auto p = BlockSchedule::parse("poly:1,1", 8);
  CHECK(p.total() == 45);  // 1+2+...+9
  CHECK(p.size_of(0) == 1);
  CHECK(p.size_of(8) == 9);

  auto c = BlockSchedule::parse("const:2", 3);
  CHECK(c.total() == 8);

  auto l = BlockSchedule::parse("list:2,0,3", 4);
  CHECK(l.size_of(0) == 2);
  CHECK(l.size_of(1) == 0);
  CHECK(l.size_of(3) == 3);
  CHECK(l.total() == 2 + 0 + 3 + 3 + 3);
  CHECK(l.block_start(2) == 2);

  CHECK_THROWS_AS(BlockSchedule::parse("weird:1", 2), io_error);
  CHECK_THROWS_AS(BlockSchedule::parse("list:0,0", 1), validation_error);
  CHECK_THROWS_AS(BlockSchedule::parse("const:0", 1), validation_error);
  CHECK_THROWS_AS(BlockSchedule::parse("poly:0,1", 1), validation_error);
}

TEST_CASE("torus distance examples") {
  auto sched = BlockSchedule::parse("list:1,1,1", 2);
  auto a = tp({0.1, 0.2, 0.25});
  CHECK(torus_dist(a, a, sched) == 0.0);

  auto b = tp({0.1, 0.2, 0.75});  // differs only at k=2 (level 2) by 0.5
  CHECK(torus_dist(a, b, sched) == 0.125);

  CHECK_THROWS_AS(torus_dist(a, tp({0.1, 0.2}), sched), validation_error);
}

TEST_CASE("torus distance matches per-coordinate brute force") {
  auto sched = BlockSchedule::parse("poly:1,1", 4);
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    TorusPoint a, b;
    for (long long k = 0; k < sched.total(); ++k) {
      a.coords.push_back(rng.u01());
      b.coords.push_back(rng.u01());
    }
    double best = 0.0;
    for (long long k = 0; k < sched.total(); ++k)
      best = std::max(best, sched.weight(sched.level_of(k)) *
                                circle_dist(a.coords[k], b.coords[k]));
    CHECK(torus_dist(a, b, sched) == best);
  }
}

TEST_CASE("torus distance is shift invariant on a dyadic lattice") {
  auto sched = BlockSchedule::parse("list:2,1", 3);
  Rng rng(11);
  auto dyadic = [&] { return static_cast<double>(rng.index(1u << 26)) * 0x1.0p-26; };
  for (int trial = 0; trial < 200; ++trial) {
    TorusPoint a, b, c;
    for (long long k = 0; k < sched.total(); ++k) {
      a.coords.push_back(dyadic());
      b.coords.push_back(dyadic());
      c.coords.push_back(dyadic());
    }
    TorusPoint as, bs;
    for (long long k = 0; k < sched.total(); ++k) {
      double x = a.coords[k] + c.coords[k];
      double y = b.coords[k] + c.coords[k];
      as.coords.push_back(x >= 1.0 ? x - 1.0 : x);
      bs.coords.push_back(y >= 1.0 ? y - 1.0 : y);
    }
    CHECK(torus_dist(as, bs, sched) == torus_dist(a, b, sched));
  }
}

TEST_CASE("code distance examples") {
  auto one = BlockSchedule::parse("list:1", 0);
  CodePoint x{{"010110"}};
  CodePoint y{{"011000"}};
  CHECK(code_dist(x, y, one) == 0.25);  // common prefix 01
  CHECK(code_dist(x, x, one) == 0.0);

  auto sched = BlockSchedule::parse("list:1,1", 1);
  CodePoint a{{"0101", "0000"}};
  CodePoint b{{"0101", "0010"}};  // level-1 coordinate, prefix 2
  CHECK(code_dist(a, b, sched) == 0.5 * 0.25);
}

TEST_CASE("code distance satisfies the strong triangle inequality") {
  auto sched = BlockSchedule::parse("list:2,1", 2);
  Rng rng(3);
  auto random_code = [&] {
    CodePoint p;
    for (long long k = 0; k < sched.total(); ++k) {
      std::string s;
      for (int d = 0; d < 8; ++d) s += rng.coin() ? '1' : '0';
      p.codes.push_back(s);
    }
    return p;
  };
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_code(), b = random_code(), c = random_code();
    double ab = code_dist(a, b, sched);
    double bc = code_dist(b, c, sched);
    double ac = code_dist(a, c, sched);
    CHECK(ac <= std::max(ab, bc));
  }
}

TEST_CASE("metric validation on hand matrices") {
  auto ok = PointCloud::from_matrix({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  auto t = validate_metric(ok, MetricLaw::triangle);
  CHECK(t.ok);
  auto u = validate_metric(ok, MetricLaw::ultra);
  CHECK_FALSE(u.ok);  // 2 > max(1,1)
  CHECK(u.worst_slack == 1.0);

  auto bad = PointCloud::from_matrix({{0, 1, 3}, {1, 0, 1}, {3, 1, 0}});
  auto tb = validate_metric(bad, MetricLaw::triangle);
  CHECK_FALSE(tb.ok);
  CHECK(tb.worst_slack == 1.0);
  CHECK(tb.worst_triple == std::array<size_t, 3>{0, 1, 2});

  auto single = PointCloud::from_points({{0.0}});
  CHECK(validate_metric(single, MetricLaw::triangle).ok);
  CHECK(validate_metric(single, MetricLaw::ultra).ok);
}

TEST_CASE("matrix constructor validation") {
  CHECK_THROWS_AS(PointCloud::from_matrix({{0, 1}, {2, 0}}), validation_error);
  CHECK_THROWS_AS(PointCloud::from_matrix({{1, 1}, {1, 0}}), validation_error);
  CHECK_THROWS_AS(PointCloud::from_matrix({{0, 1, 1}, {1, 0, 1}}), validation_error);
  CHECK_THROWS_AS(PointCloud::from_matrix({{0, -1}, {-1, 0}}), validation_error);
}

TEST_CASE("normalized cloud has diameter exactly one") {
  Rng rng(5);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({3 * rng.u01() + 1, 2 * rng.u01()});
  auto cloud = PointCloud::from_points(pts);
  auto norm = cloud.normalized();
  CHECK(norm.diameter() == 1.0);
  CHECK(norm.matrix_mode());
  // distance ratios preserved up to rounding
  double d = cloud.diameter();
  CHECK(norm.dist(3, 17) == doctest::Approx(cloud.dist(3, 17) / d).epsilon(1e-15));
}

TEST_CASE("ultrametric tree hand example") {
  auto cloud = PointCloud::from_matrix({{0, 1, 2}, {1, 0, 2}, {2, 2, 0}});
  auto tree = ultrametric_to_tree(cloud);
  const auto& root = tree.nodes[tree.root];
  CHECK(root.diameter == 2.0);
  REQUIRE(root.children.size() == 2);
  const auto& left = tree.nodes[root.children[0]];
  const auto& right = tree.nodes[root.children[1]];
  CHECK(left.diameter == 1.0);  // {a, b}
  REQUIRE(left.children.size() == 2);
  CHECK(tree.nodes[left.children[0]].leaf == 0);
  CHECK(tree.nodes[left.children[1]].leaf == 1);
  CHECK(right.leaf == 2);
}

TEST_CASE("ultrametric tree with all distances equal") {
  auto cloud = PointCloud::from_matrix({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  auto tree = ultrametric_to_tree(cloud);
  const auto& root = tree.nodes[tree.root];
  CHECK(root.diameter == 1.0);
  REQUIRE(root.children.size() == 3);
  for (int c : root.children) CHECK(tree.nodes[c].leaf >= 0);
}

TEST_CASE("ultrametric tree round trip") {
  // random ultrametric: distances from a random binary merge tree over
  // dyadic diameters, reconstructed exactly
  Rng rng(21);
  const size_t n = 24;
  std::vector<double> m(n * n, 0.0);
  // assign distances via random nested partition of indices
  std::vector<std::vector<size_t>> groups{{}};
  for (size_t i = 0; i < n; ++i) groups[0].push_back(i);
  struct Item {
    std::vector<size_t> members;
    int level;
  };
  std::vector<Item> work{{groups[0], 0}};
  while (!work.empty()) {
    Item it = work.back();
    work.pop_back();
    if (it.members.size() < 2 || it.level > 6) continue;
    double diam = std::ldexp(1.0, -it.level);
    std::vector<size_t> a, b;
    for (size_t idx : it.members) (rng.coin() ? a : b).push_back(idx);
    if (a.empty() || b.empty()) {
      work.push_back({it.members, it.level});  // retry the split
      continue;
    }
    for (size_t x : a)
      for (size_t y : b) m[x * n + y] = m[y * n + x] = diam;
    work.push_back({a, it.level + 1});
    work.push_back({b, it.level + 1});
  }
  // any leftover zero off-diagonal pairs get the smallest positive level
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (m[i * n + j] == 0.0) m[i * n + j] = m[j * n + i] = std::ldexp(1.0, -8);

  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) rows[i][j] = m[i * n + j];
  auto cloud = PointCloud::from_matrix(rows);
  REQUIRE(validate_metric(cloud, MetricLaw::ultra).ok);
  auto tree = ultrametric_to_tree(cloud);
  auto rebuilt = tree_distances(tree, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) CHECK(rebuilt[i * n + j] == m[i * n + j]);
}

TEST_CASE("non-ultrametric input is rejected with a witness") {
  auto cloud = PointCloud::from_matrix({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  CHECK_THROWS_AS(ultrametric_to_tree(cloud), validation_error);
}
