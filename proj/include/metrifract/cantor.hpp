#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metrifract/geometry.hpp"
#include "metrifract/rational.hpp"
#include "metrifract/report.hpp"

namespace metrifract {

// ==== nested binary interval systems on the weighted torus ====

struct RatInterval {
  Rat lo;
  Rat hi;
};

// Per coordinate k in block I_n, a binary tree of closed intervals inside
// [0, 1 - b_k]. Children of a depth-p interval are left/right aligned and
// separated by a gap of 2^{-p} a_p b_k, with a_p = 1/(2(p+1)^2) and
// b_k = eps / (4(n+1)^2 G(n)). All interval data is exact rational; the
// recursion satisfies 2^p len_p + b_k (1 + sum_{q<p} a_q) = 1 at every depth.
class CantorSystem {
 public:
  static CantorSystem build(const Rat& eps, BlockSchedule sched, int p_max);

  const Rat& epsilon() const { return eps_; }
  const BlockSchedule& schedule() const { return sched_; }
  int depth() const { return p_max_; }
  long long coords() const { return sched_.total(); }

  const Rat& a(int p) const { return a_[static_cast<size_t>(p)]; }
  // 1 + sum_{q<p} a_q
  const Rat& prefix_a(int p) const { return prefix_[static_cast<size_t>(p)]; }
  const Rat& b(long long k) const;
  const Rat& len(long long k, int p) const;
  const Rat& gap(long long k, int p) const;
  const Rat& step(long long k, int p) const;

  RatInterval interval(long long k, const std::string& code) const;
  Rat left_endpoint(long long k, const std::string& code) const;

  // Left endpoints of the coded intervals, one per coordinate.
  std::vector<Rat> encode_exact(const CodePoint& code) const;
  // Doubles rounded up so re-read atoms stay inside their closed intervals.
  TorusPoint encode(const CodePoint& code) const;

  // Weighted torus distance max_k 2^{-n_k} |enc(x)_k - enc(y)_k|_circ, exact.
  Rat exact_distance(const CodePoint& x, const CodePoint& y) const;

  // Membership of t mod 1 in the depth-p_max set of coordinate k.
  bool contains(long long k, const Rat& t) const;
  // Codes of atom + shift per coordinate; nullopt when any coordinate falls
  // in a gap or outside [0, 1 - b_k].
  std::optional<CodePoint> locate(const TorusPoint& atom,
                                  const std::vector<Rat>& shift) const;

  Json descriptor() const;

  // Shared-denominator integer views for hot paths: every stored rational at
  // level n equals num / common_denom() with num an exact integer.
  const BigInt& common_denom() const { return denom_; }
  const BigInt& b_num(int level) const;
  const BigInt& len_num(int level, int p) const;
  const BigInt& step_num(int level, int p) const;

 private:
  CantorSystem() = default;
  bool walk_coord(long long k, const Rat& t, std::string* code_out) const;

  Rat eps_;
  BlockSchedule sched_;
  int p_max_ = 0;
  std::vector<Rat> a_;       // p = 0..p_max
  std::vector<Rat> prefix_;  // p = 0..p_max
  // Indexed by level n; empty rows for levels with G(n) = 0.
  std::vector<Rat> b_;
  std::vector<std::vector<Rat>> len_;   // p = 0..p_max
  std::vector<std::vector<Rat>> gap_;   // p = 0..p_max-1
  std::vector<std::vector<Rat>> step_;  // p = 0..p_max-1
  BigInt denom_;
  std::vector<BigInt> b_num_;
  std::vector<std::vector<BigInt>> len_num_;
  std::vector<std::vector<BigInt>> step_num_;
};

// ==== mass accounting ====

struct MeasureAccount {
  std::vector<Rat> omitted_trunc;    // per coordinate: b_k (1 + sum_{p<p_max} a_p)
  std::vector<double> omitted_full;  // per coordinate: b_k (1 + pi^2/12 - ...) limit
  Rat sum_b;
  Rat product_lower;  // prod_k (1 - 2 b_k)
  double sum_omitted_trunc = 0.0;
  bool bounds_ok = false;  // product_lower >= 1 - 2 sum_b > 1 - eps, exact
};

MeasureAccount measure_account(const CantorSystem& sys);

// ==== modulus certificates for the code-to-torus map ====

struct ModulusReport {
  size_t pairs = 0;          // pairs with at least one differing coordinate
  size_t skipped = 0;        // identical code pairs
  size_t ratio_checked = 0;  // pairs with j >= 1
  size_t violations = 0;
  double max_ratio = 0.0;      // max over checked pairs of -log2(d_G) / j
  double bound_c_margin = 0.0; // min over checked pairs of rhs - ratio
  std::vector<std::string> notes;
};

// For each pair with code distance 2^{-j}: certifies exactly that
//   (a) d_G <= 2^{-j}  and  (b) d_G >= 2^{-j} a_p b_k
// at the first coordinate realizing j, and for j >= 1 the log-ratio bound
//   (c) -log2 d_G <= j + 2 log2(p+1) + 3 + 2 log2(n+1) + log2 G(n) - log2 eps,
// which rearranges to exactly the inequality in (b).
ModulusReport verify_modulus(
    const CantorSystem& sys,
    const std::vector<std::pair<CodePoint, CodePoint>>& pairs,
    int threads = 1);

// ==== shift search for discrete measures ====

struct DiscreteMeasure {
  std::vector<TorusPoint> atoms;
  std::vector<double> weights;
  double total() const;
};

struct ShiftOptions {
  uint64_t seed = 0;
  int threads = 1;
  int random_candidates = 64;
  int atom_candidates = 64;
  int exact_candidates = 8;
  long long sweep_cost_cap = 40000000;  // atoms * 2^{p_max+1} * K
};

struct ShiftFit {
  std::vector<Rat> shift;
  std::vector<double> shift_dbl;
  double captured = 0.0;
  double total = 0.0;
  size_t captured_atoms = 0;
  std::vector<char> captured_mask;
  bool sweep_used = false;
  size_t candidates_scored = 0;
  size_t candidates_exact = 0;
};

// Searches translations x of the product Cantor set maximizing the captured
// atom mass: candidate shifts from {0}, atom-aligned shifts, seeded dyadics
// on the 2^{-grid_depth} grid, and a per-coordinate event-sweep composite;
// the best few by a slack-tolerant double prescore are re-checked with exact
// rational membership. Ties prefer the lexicographically smaller shift.
ShiftFit shift_fit(const CantorSystem& sys, const DiscreteMeasure& mu,
                   int grid_depth, const ShiftOptions& opt = {});

}  // namespace metrifract
