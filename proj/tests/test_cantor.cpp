#include "doctest.h"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "metrifract/cantor.hpp"
#include "metrifract/geometry.hpp"
#include "metrifract/rational.hpp"

using namespace metrifract;

namespace {

CantorSystem half_system(int p_max, int n_max = 0) {
  return CantorSystem::build(parse_rat("1/2"), BlockSchedule::parse("list:1", n_max),
                             p_max);
}

CodePoint codes_of(std::vector<std::string> cs) {
  CodePoint cp;
  cp.codes = std::move(cs);
  return cp;
}

std::vector<std::string> random_codes(Rng& rng, size_t coords, int depth) {
  std::vector<std::string> out(coords);
  for (auto& s : out) {
    s.reserve(static_cast<size_t>(depth));
    for (int p = 0; p < depth; ++p) s.push_back(rng.coin() ? '1' : '0');
  }
  return out;
}

}  // namespace

TEST_CASE("system construction validates its inputs") {
  auto sched = BlockSchedule::parse("list:1", 0);
  CHECK_THROWS_AS(CantorSystem::build(Rat(0), sched, 4), validation_error);
  CHECK_THROWS_AS(CantorSystem::build(Rat(1), sched, 4), validation_error);
  CHECK_THROWS_AS(CantorSystem::build(parse_rat("3/2"), sched, 4), validation_error);
  CHECK_THROWS_AS(CantorSystem::build(parse_rat("1/2"), sched, 0), validation_error);
}

TEST_CASE("interval recursion matches hand values") {
  auto sys = half_system(4);
  // b = (1/2)/4, root [0, 7/8], first gap 1/16
  CHECK(sys.b(0) == parse_rat("1/8"));
  CHECK(sys.len(0, 0) == parse_rat("7/8"));
  CHECK(sys.gap(0, 0) == parse_rat("1/16"));
  CHECK(sys.len(0, 1) == parse_rat("13/32"));
  CHECK(sys.step(0, 0) == parse_rat("15/32"));
  CHECK(sys.len(0, 2) == parse_rat("51/256"));
  CHECK(sys.step(0, 1) == parse_rat("53/256"));

  auto root = sys.interval(0, "");
  CHECK(root.lo == 0);
  CHECK(root.hi == parse_rat("7/8"));
  auto left = sys.interval(0, "0");
  CHECK(left.lo == 0);
  CHECK(left.hi == parse_rat("13/32"));
  auto right = sys.interval(0, "1");
  CHECK(right.lo == parse_rat("15/32"));
  CHECK(right.hi == parse_rat("7/8"));
  // children are left/right aligned inside the parent
  CHECK(sys.interval(0, "00").lo == 0);
  CHECK(sys.interval(0, "01").hi == parse_rat("13/32"));
  CHECK(sys.interval(0, "11").hi == parse_rat("7/8"));
  CHECK(sys.interval(0, "10").lo == parse_rat("15/32"));
}

TEST_CASE("tiling identity and gap budget hold exactly at depth") {
  auto sys = CantorSystem::build(parse_rat("1/10"),
                                 BlockSchedule::parse("poly:1,1", 3), 12);
  for (long long k = 0; k < sys.coords(); ++k) {
    for (int p = 0; p <= sys.depth(); ++p) {
      BigInt pieces = BigInt(1) << p;
      Rat tiles = Rat(pieces) * sys.len(k, p) + sys.b(k) * sys.prefix_a(p);
      CHECK(tiles == 1);
    }
    for (int p = 0; p < sys.depth(); ++p) {
      CHECK(sys.gap(k, p) <= sys.b(k));
      CHECK(sys.step(k, p) == sys.len(k, p) - sys.len(k, p + 1));
      CHECK(sys.gap(k, p) > 0);
    }
  }
}

TEST_CASE("encode rounds up into the coded interval") {
  auto sys = half_system(6);
  auto pt = sys.encode(codes_of({"1"}));
  CHECK(pt.coords[0] == 0.46875);  // 15/32 is an exact double
  // round trip: the emitted double re-reads to the same codes
  Rng rng(7);
  std::vector<Rat> zero(1, Rat(0));
  for (int trial = 0; trial < 40; ++trial) {
    auto code = codes_of(random_codes(rng, 1, 6));
    auto atom = sys.encode(code);
    auto back = sys.locate(atom, zero);
    REQUIRE(back.has_value());
    CHECK(back->codes == code.codes);
  }
}

TEST_CASE("exact code distance matches hand values and the float metric") {
  auto sys = half_system(8);
  CHECK(sys.exact_distance(codes_of({"0"}), codes_of({"1"})) == parse_rat("15/32"));
  CHECK(sys.exact_distance(codes_of({"01"}), codes_of({"01"})) == 0);

  auto sys2 = CantorSystem::build(parse_rat("1/3"), BlockSchedule::parse("list:1", 1), 8);
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    auto x = codes_of(random_codes(rng, 2, 8));
    auto y = codes_of(random_codes(rng, 2, 8));
    Rat d = sys2.exact_distance(x, y);
    CHECK(d == sys2.exact_distance(y, x));
    double dd = torus_dist(sys2.encode(x), sys2.encode(y), sys2.schedule());
    CHECK(std::fabs(rat_double(d) - dd) <= 1e-12);
  }
}

TEST_CASE("membership walks reject gaps and the trailing band") {
  auto sys = half_system(5);
  CHECK(sys.contains(0, parse_rat("15/32")));
  CHECK(sys.contains(0, Rat(0)));
  CHECK_FALSE(sys.contains(0, parse_rat("45/100")));  // root gap (13/32, 15/32)
  CHECK_FALSE(sys.contains(0, parse_rat("9/10")));    // beyond 1 - b = 7/8
  TorusPoint in_gap{{0.45}};
  CHECK_FALSE(sys.locate(in_gap, {Rat(0)}).has_value());
  TorusPoint outside{{0.9}};
  CHECK_FALSE(sys.locate(outside, {Rat(0)}).has_value());
  // wraparound: shifting 0.9 by 0.1 lands on 0 exactly
  CHECK(sys.locate(outside, {parse_rat("1/10")}).has_value());
}

TEST_CASE("depth-two codes encode injectively") {
  auto sys = CantorSystem::build(parse_rat("1/2"), BlockSchedule::parse("list:1", 1), 2);
  std::vector<CodePoint> pts;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      auto bits = [](int v) {
        return std::string{v & 2 ? '1' : '0', v & 1 ? '1' : '0'};
      };
      pts.push_back(codes_of({bits(a), bits(b)}));
    }
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j)
      CHECK(sys.exact_distance(pts[i], pts[j]) > 0);
}

TEST_CASE("shared prefixes pin encoded points together") {
  auto sys = half_system(10);
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_codes(rng, 1, 10)[0];
    auto y = x;
    int flip = static_cast<int>(rng.index(10));
    y[static_cast<size_t>(flip)] = y[static_cast<size_t>(flip)] == '0' ? '1' : '0';
    for (size_t p = static_cast<size_t>(flip) + 1; p < y.size(); ++p)
      y[p] = rng.coin() ? '1' : '0';
    Rat lx = sys.left_endpoint(0, x), ly = sys.left_endpoint(0, y);
    Rat d = lx >= ly ? lx - ly : ly - lx;
    CHECK(d <= sys.len(0, flip));  // both inside the common depth-flip interval
    CHECK(d >= sys.gap(0, flip));  // separated by at least the gap at the split
  }
}

TEST_CASE("schedules with empty blocks still build") {
  auto sched = BlockSchedule::from_sizes({2, 0, 1}, "list:2,0,1");
  auto sys = CantorSystem::build(parse_rat("1/4"), sched, 6);
  CHECK(sys.coords() == 3);
  CHECK(sys.b(2) == parse_rat("1/144"));  // (1/4)/(4*9*1)
  CHECK(sys.contains(2, Rat(0)));
  auto pt = sys.encode(codes_of({"101010", "010101", "110011"}));
  CHECK(pt.coords.size() == 3);
}

TEST_CASE("mass accounting is exact where it can be") {
  auto sys = CantorSystem::build(parse_rat("1/10"),
                                 BlockSchedule::parse("list:1", 3), 12);
  auto acc = measure_account(sys);
  CHECK(acc.sum_b == parse_rat("41/1152"));
  Rat expect_product = parse_rat("19/20") * parse_rat("79/80") *
                       parse_rat("179/180") * parse_rat("319/320");
  CHECK(acc.product_lower == expect_product);
  CHECK(acc.bounds_ok);
  REQUIRE(acc.omitted_trunc.size() == 4);
  for (long long k = 0; k < 4; ++k) {
    const size_t kk = static_cast<size_t>(k);
    // independent recomputation from the leaf lengths
    Rat leaf = sys.interval(k, std::string(12, '0')).hi;
    BigInt leaves = BigInt(1) << 12;
    CHECK(acc.omitted_trunc[kk] == 1 - Rat(leaves) * leaf);
    CHECK(acc.omitted_full[kk] > rat_double(acc.omitted_trunc[kk]));
    CHECK(acc.omitted_full[kk] < 2.0 * rat_double(sys.b(k)));
  }
  CHECK(acc.sum_omitted_trunc ==
        doctest::Approx(rat_double(acc.sum_b) * 1.7825).epsilon(0.02));
}

TEST_CASE("modulus report on the hand pair") {
  auto sys = half_system(4);
  std::vector<std::pair<CodePoint, CodePoint>> pairs;
  pairs.emplace_back(codes_of({"0"}), codes_of({"1"}));
  auto rep = verify_modulus(sys, pairs);
  CHECK(rep.pairs == 1);
  CHECK(rep.skipped == 0);
  CHECK(rep.ratio_checked == 0);  // j = 0 has no log ratio
  CHECK(rep.violations == 0);
  CHECK(rep.max_ratio == 0.0);
  // d_G = 15/32 sits inside [a_0 b_0, 1] = [1/16, 1]
  CHECK(sys.exact_distance(pairs[0].first, pairs[0].second) >= parse_rat("1/16"));
}

TEST_CASE("identical code pairs are skipped") {
  auto sys = half_system(4);
  std::vector<std::pair<CodePoint, CodePoint>> pairs;
  pairs.emplace_back(codes_of({"0101"}), codes_of({"0101"}));
  auto rep = verify_modulus(sys, pairs);
  CHECK(rep.pairs == 0);
  CHECK(rep.skipped == 1);
  CHECK(rep.violations == 0);
}

TEST_CASE("sampled pairs satisfy every certificate") {
  auto sys = CantorSystem::build(parse_rat("1/10"),
                                 BlockSchedule::parse("poly:1,1", 3), 12);
  const size_t K = static_cast<size_t>(sys.coords());
  Rng rng(101);
  std::vector<std::pair<CodePoint, CodePoint>> pairs;
  for (int i = 0; i < 300; ++i)
    pairs.emplace_back(codes_of(random_codes(rng, K, 12)),
                       codes_of(random_codes(rng, K, 12)));
  auto rep = verify_modulus(sys, pairs, 2);
  CHECK(rep.pairs + rep.skipped == 300);
  CHECK(rep.violations == 0);
  CHECK(rep.ratio_checked > 0);
  CHECK(rep.max_ratio >= 1.0 - 1e-12);
  CHECK(rep.bound_c_margin >= -1e-9);
  // cross-oracle: the exact distance never exceeds the code distance
  for (const auto& pr : pairs) {
    double rho = code_dist(pr.first, pr.second, sys.schedule());
    CHECK(sys.exact_distance(pr.first, pr.second) <= Rat(rho));
  }
}

TEST_CASE("modulus verification validates code structure") {
  auto sys = half_system(4);
  std::vector<std::pair<CodePoint, CodePoint>> depth_mismatch;
  depth_mismatch.emplace_back(codes_of({"01"}), codes_of({"011"}));
  CHECK_THROWS_AS(verify_modulus(sys, depth_mismatch), validation_error);
  std::vector<std::pair<CodePoint, CodePoint>> bad_char;
  bad_char.emplace_back(codes_of({"0x"}), codes_of({"01"}));
  CHECK_THROWS_AS(verify_modulus(sys, bad_char), io_error);
  std::vector<std::pair<CodePoint, CodePoint>> too_deep;
  too_deep.emplace_back(codes_of({"010101"}), codes_of({"010100"}));
  CHECK_THROWS_AS(verify_modulus(sys, too_deep), validation_error);
}

TEST_CASE("zero shift wins when every atom is already coded") {
  auto sys = CantorSystem::build(parse_rat("1/2"), BlockSchedule::parse("list:1", 1), 6);
  DiscreteMeasure mu;
  Rng rng(31);
  for (int i = 0; i < 32; ++i) {
    mu.atoms.push_back(sys.encode(codes_of(random_codes(rng, 2, 6))));
    mu.weights.push_back(1.0);
  }
  auto fit = shift_fit(sys, mu, 6);
  CHECK(fit.captured == fit.total);
  CHECK(fit.captured_atoms == 32);
  REQUIRE(fit.shift.size() == 2);
  CHECK(fit.shift[0] == 0);
  CHECK(fit.shift[1] == 0);
  for (char m : fit.captured_mask) CHECK(m == 1);
}

TEST_CASE("a single displaced atom is always captured") {
  auto sys = half_system(8);
  DiscreteMeasure mu;
  mu.atoms.push_back(TorusPoint{{0.777}});
  mu.weights.push_back(1.0);
  auto fit = shift_fit(sys, mu, 8);
  CHECK(fit.captured == 1.0);
  CHECK(fit.captured_atoms == 1);
  CHECK(sys.locate(mu.atoms[0], fit.shift).has_value());
}

TEST_CASE("event sweep clears the union-bound capture floor") {
  auto sys = CantorSystem::build(parse_rat("1/10"),
                                 BlockSchedule::parse("list:1", 1), 8);
  auto acc = measure_account(sys);
  DiscreteMeasure mu;
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    mu.atoms.push_back(TorusPoint{{rng.u01(), rng.u01()}});
    mu.weights.push_back(1.0);
  }
  auto fit = shift_fit(sys, mu, 8);
  CHECK(fit.sweep_used);
  // best per-coordinate breakpoint beats the mean, so misses union-bound
  double floor = (1.0 - acc.sum_omitted_trunc) * fit.total - 1.0 - 1e-9;
  CHECK(fit.captured >= floor);
  double mask_weight = 0.0;
  size_t mask_count = 0;
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    if (fit.captured_mask[i]) {
      mask_weight += mu.weights[i];
      ++mask_count;
    }
  CHECK(fit.captured == mask_weight);
  CHECK(fit.captured_atoms == mask_count);
  // every captured atom really lands inside the shifted coding set
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    CHECK(static_cast<bool>(fit.captured_mask[i]) ==
          sys.locate(mu.atoms[i], fit.shift).has_value());
}

TEST_CASE("the sweep respects its cost cap") {
  auto sys = half_system(8);
  DiscreteMeasure mu;
  mu.atoms.push_back(TorusPoint{{0.3}});
  mu.weights.push_back(1.0);
  ShiftOptions opt;
  opt.sweep_cost_cap = 1;
  auto fit = shift_fit(sys, mu, 8, opt);
  CHECK_FALSE(fit.sweep_used);
  CHECK(fit.captured == 1.0);  // atom-aligned candidate still catches it
}

TEST_CASE("shift search validates its inputs") {
  auto sys = half_system(6);
  DiscreteMeasure mu;
  mu.atoms.push_back(TorusPoint{{0.25}});
  mu.weights.push_back(1.0);
  CHECK_THROWS_AS(shift_fit(sys, mu, 7), validation_error);  // deeper than system
  DiscreteMeasure bad_coord;
  bad_coord.atoms.push_back(TorusPoint{{1.5}});
  bad_coord.weights.push_back(1.0);
  CHECK_THROWS_AS(shift_fit(sys, bad_coord, 6), validation_error);
  DiscreteMeasure bad_weight;
  bad_weight.atoms.push_back(TorusPoint{{0.5}});
  bad_weight.weights.push_back(-1.0);
  CHECK_THROWS_AS(shift_fit(sys, bad_weight, 6), validation_error);
  DiscreteMeasure empty;
  CHECK_THROWS_AS(shift_fit(sys, empty, 6), validation_error);
}

TEST_CASE("shift search is deterministic across thread counts") {
  auto sys = CantorSystem::build(parse_rat("1/5"), BlockSchedule::parse("list:1", 1), 7);
  DiscreteMeasure mu;
  Rng rng(41);
  for (int i = 0; i < 60; ++i) {
    mu.atoms.push_back(TorusPoint{{rng.u01(), rng.u01()}});
    mu.weights.push_back(0.5 + rng.u01());
  }
  ShiftOptions one;
  one.threads = 1;
  ShiftOptions four;
  four.threads = 4;
  auto a = shift_fit(sys, mu, 7, one);
  auto b = shift_fit(sys, mu, 7, four);
  auto c = shift_fit(sys, mu, 7, one);
  CHECK(a.captured == b.captured);
  CHECK(a.captured == c.captured);
  CHECK(a.shift == b.shift);
  CHECK(a.shift == c.shift);
  CHECK(a.captured_mask == b.captured_mask);
}
