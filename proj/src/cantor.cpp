#include "metrifract/cantor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>
#include <utility>

namespace metrifract {

namespace {

Rat rat_mod1(Rat t) {
  while (t < 0) t += 1;
  while (t >= 1) t -= 1;
  return t;
}

BigInt pow2(int e) { return BigInt(1) << e; }

std::string leaf_code(uint64_t bits, int depth) {
  std::string s(static_cast<size_t>(depth), '0');
  for (int p = 0; p < depth; ++p)
    if ((bits >> (depth - 1 - p)) & 1) s[static_cast<size_t>(p)] = '1';
  return s;
}

}  // namespace

// ==== construction ====

CantorSystem CantorSystem::build(const Rat& eps, BlockSchedule sched, int p_max) {
  if (!(eps > 0 && eps < 1)) throw validation_error("epsilon must lie in (0,1)");
  if (sched.total() < 1) throw validation_error("schedule has no coordinates");
  if (p_max < 1 || p_max > 4096) throw validation_error("depth must lie in [1, 4096]");

  CantorSystem sys;
  sys.eps_ = eps;
  sys.sched_ = std::move(sched);
  sys.p_max_ = p_max;

  const size_t P = static_cast<size_t>(p_max);
  sys.a_.resize(P + 1);
  sys.prefix_.resize(P + 1);
  Rat acc = 1;
  for (size_t p = 0; p <= P; ++p) {
    sys.prefix_[p] = acc;
    BigInt den = BigInt(2) * static_cast<long long>(p + 1) * static_cast<long long>(p + 1);
    sys.a_[p] = Rat(BigInt(1), den);
    acc += sys.a_[p];
  }

  const int L = sys.sched_.levels();
  sys.b_.assign(static_cast<size_t>(L), Rat(0));
  sys.len_.assign(static_cast<size_t>(L), {});
  sys.gap_.assign(static_cast<size_t>(L), {});
  sys.step_.assign(static_cast<size_t>(L), {});
  for (int n = 0; n < L; ++n) {
    long long g = sys.sched_.size_of(n);
    if (g == 0) continue;
    const size_t nn = static_cast<size_t>(n);
    BigInt den = BigInt(4) * (n + 1) * (n + 1) * g;
    Rat b = eps / Rat(den);
    sys.b_[nn] = b;
    auto& len = sys.len_[nn];
    auto& gap = sys.gap_[nn];
    auto& step = sys.step_[nn];
    len.resize(P + 1);
    gap.resize(P);
    step.resize(P);
    len[0] = 1 - b;
    for (size_t p = 0; p < P; ++p) {
      gap[p] = sys.a_[p] * b / Rat(pow2(static_cast<int>(p)));
      len[p + 1] = (len[p] - gap[p]) / 2;
      step[p] = len[p] - len[p + 1];
      if (!(len[p + 1] > 0)) throw std::logic_error("interval recursion collapsed");
      if (!(gap[p] <= b)) throw std::logic_error("gap exceeded coordinate budget");
    }
    // tiling identity at every depth: 2^p len_p + b (1 + sum_{q<p} a_q) = 1
    for (size_t p = 0; p <= P; ++p)
      if (Rat(pow2(static_cast<int>(p))) * len[p] + b * sys.prefix_[p] != 1)
        throw std::logic_error("interval telescope broke");
  }

  Rat sum_a = sys.prefix_[P] + sys.a_[P] - 1;
  if (!(sum_a < 1)) throw std::logic_error("depth weights exceeded unit budget");
  Rat sum_b = 0;
  for (int n = 0; n < L; ++n)
    sum_b += Rat(sys.sched_.size_of(n)) * sys.b_[static_cast<size_t>(n)];
  if (!(sum_b < eps / 2)) throw std::logic_error("coordinate budgets exceeded eps/2");

  BigInt D = 1;
  auto fold = [&D](const Rat& x) {
    BigInt q = denominator(x);
    D = boost::multiprecision::lcm(D, q);
  };
  for (int n = 0; n < L; ++n) {
    if (sys.sched_.size_of(n) == 0) continue;
    const size_t nn = static_cast<size_t>(n);
    fold(sys.b_[nn]);
    for (const auto& x : sys.len_[nn]) fold(x);
    for (const auto& x : sys.step_[nn]) fold(x);
    for (const auto& x : sys.gap_[nn]) fold(x);
  }
  sys.denom_ = D;
  auto num_of = [&D](const Rat& x) {
    BigInt q = denominator(x);
    BigInt scale = D / q;
    BigInt num = numerator(x);
    return BigInt(num * scale);
  };
  sys.b_num_.assign(static_cast<size_t>(L), BigInt(0));
  sys.len_num_.assign(static_cast<size_t>(L), {});
  sys.step_num_.assign(static_cast<size_t>(L), {});
  for (int n = 0; n < L; ++n) {
    if (sys.sched_.size_of(n) == 0) continue;
    const size_t nn = static_cast<size_t>(n);
    sys.b_num_[nn] = num_of(sys.b_[nn]);
    sys.len_num_[nn].reserve(P + 1);
    for (const auto& x : sys.len_[nn]) sys.len_num_[nn].push_back(num_of(x));
    sys.step_num_[nn].reserve(P);
    for (const auto& x : sys.step_[nn]) sys.step_num_[nn].push_back(num_of(x));
  }
  return sys;
}

// ==== accessors ====

const Rat& CantorSystem::b(long long k) const {
  if (k < 0 || k >= coords()) throw validation_error("coordinate out of range");
  return b_[static_cast<size_t>(sched_.level_of(k))];
}

const Rat& CantorSystem::len(long long k, int p) const {
  if (k < 0 || k >= coords()) throw validation_error("coordinate out of range");
  if (p < 0 || p > p_max_) throw validation_error("depth out of range");
  return len_[static_cast<size_t>(sched_.level_of(k))][static_cast<size_t>(p)];
}

const Rat& CantorSystem::gap(long long k, int p) const {
  if (k < 0 || k >= coords()) throw validation_error("coordinate out of range");
  if (p < 0 || p >= p_max_) throw validation_error("depth out of range");
  return gap_[static_cast<size_t>(sched_.level_of(k))][static_cast<size_t>(p)];
}

const Rat& CantorSystem::step(long long k, int p) const {
  if (k < 0 || k >= coords()) throw validation_error("coordinate out of range");
  if (p < 0 || p >= p_max_) throw validation_error("depth out of range");
  return step_[static_cast<size_t>(sched_.level_of(k))][static_cast<size_t>(p)];
}

const BigInt& CantorSystem::b_num(int level) const {
  return b_num_[static_cast<size_t>(level)];
}
const BigInt& CantorSystem::len_num(int level, int p) const {
  return len_num_[static_cast<size_t>(level)][static_cast<size_t>(p)];
}
const BigInt& CantorSystem::step_num(int level, int p) const {
  return step_num_[static_cast<size_t>(level)][static_cast<size_t>(p)];
}

// ==== coding ====

Rat CantorSystem::left_endpoint(long long k, const std::string& code) const {
  if (k < 0 || k >= coords()) throw validation_error("coordinate out of range");
  if (static_cast<int>(code.size()) > p_max_)
    throw validation_error("code deeper than the system");
  const auto& step = step_[static_cast<size_t>(sched_.level_of(k))];
  Rat L = 0;
  for (size_t p = 0; p < code.size(); ++p) {
    if (code[p] == '1')
      L += step[p];
    else if (code[p] != '0')
      throw io_error("code characters must be 0 or 1");
  }
  return L;
}

RatInterval CantorSystem::interval(long long k, const std::string& code) const {
  Rat L = left_endpoint(k, code);
  const auto& len = len_[static_cast<size_t>(sched_.level_of(k))];
  return {L, L + len[code.size()]};
}

std::vector<Rat> CantorSystem::encode_exact(const CodePoint& code) const {
  if (static_cast<long long>(code.codes.size()) != coords())
    throw validation_error("code has wrong number of coordinates");
  std::vector<Rat> out;
  out.reserve(code.codes.size());
  for (long long k = 0; k < coords(); ++k)
    out.push_back(left_endpoint(k, code.codes[static_cast<size_t>(k)]));
  return out;
}

TorusPoint CantorSystem::encode(const CodePoint& code) const {
  std::vector<Rat> exact = encode_exact(code);
  TorusPoint pt;
  pt.coords.reserve(exact.size());
  for (const Rat& L : exact) {
    double d = rat_double_up(L);
    if (d >= 1.0) d = std::nextafter(1.0, 0.0);
    pt.coords.push_back(d);
  }
  return pt;
}

Rat CantorSystem::exact_distance(const CodePoint& x, const CodePoint& y) const {
  std::vector<Rat> ex = encode_exact(x), ey = encode_exact(y);
  Rat best = 0;
  for (long long k = 0; k < coords(); ++k) {
    const size_t kk = static_cast<size_t>(k);
    Rat d = ex[kk] >= ey[kk] ? Rat(ex[kk] - ey[kk]) : Rat(ey[kk] - ex[kk]);
    Rat circ = 2 * d <= 1 ? d : Rat(1 - d);
    Rat val = circ / Rat(pow2(sched_.level_of(k)));
    if (val > best) best = val;
  }
  return best;
}

// ==== membership ====

bool CantorSystem::walk_coord(long long k, const Rat& t, std::string* code_out) const {
  const size_t lvl = static_cast<size_t>(sched_.level_of(k));
  const auto& len = len_[lvl];
  const auto& step = step_[lvl];
  if (t < 0 || t > len[0]) return false;
  Rat L = 0;
  for (int p = 0; p < p_max_; ++p) {
    const size_t pp = static_cast<size_t>(p);
    if (t <= L + len[pp + 1]) {
      if (code_out) code_out->push_back('0');
    } else if (t >= L + step[pp]) {
      L += step[pp];
      if (code_out) code_out->push_back('1');
    } else {
      return false;
    }
  }
  return true;
}

bool CantorSystem::contains(long long k, const Rat& t) const {
  if (k < 0 || k >= coords()) throw validation_error("coordinate out of range");
  return walk_coord(k, rat_mod1(t), nullptr);
}

std::optional<CodePoint> CantorSystem::locate(const TorusPoint& atom,
                                              const std::vector<Rat>& shift) const {
  const size_t K = static_cast<size_t>(coords());
  if (atom.coords.size() != K || shift.size() != K)
    throw validation_error("atom/shift dimension mismatch");
  CodePoint cp;
  cp.codes.resize(K);
  for (size_t k = 0; k < K; ++k) {
    if (!std::isfinite(atom.coords[k]))
      throw validation_error("atom coordinates must be finite");
    Rat t = rat_mod1(Rat(atom.coords[k]) + shift[k]);
    cp.codes[k].reserve(static_cast<size_t>(p_max_));
    if (!walk_coord(static_cast<long long>(k), t, &cp.codes[k])) return std::nullopt;
  }
  return cp;
}

Json CantorSystem::descriptor() const {
  Json j = Json::object();
  j.set("epsilon", Json::str(rat_string(eps_)));
  j.set("G", Json::str(sched_.spec()));
  j.set("p_max", Json::integer(p_max_));
  j.set("coords", Json::integer(coords()));
  return j;
}

// ==== mass accounting ====

MeasureAccount measure_account(const CantorSystem& sys) {
  MeasureAccount acc;
  const long long K = sys.coords();
  const int P = sys.depth();
  const double tail_factor = 1.0 + 3.14159265358979323846 * 3.14159265358979323846 / 12.0;
  acc.sum_b = 0;
  acc.product_lower = 1;
  Rat sum_trunc = 0;
  for (long long k = 0; k < K; ++k) {
    const Rat& b = sys.b(k);
    Rat omit = b * sys.prefix_a(P);
    if (omit != 1 - Rat(pow2(P)) * sys.len(k, P))
      throw std::logic_error("truncation accounting disagrees with interval lengths");
    acc.omitted_trunc.push_back(omit);
    acc.omitted_full.push_back(rat_double(b) * tail_factor);
    acc.sum_b += b;
    acc.product_lower *= 1 - 2 * b;
    sum_trunc += omit;
  }
  acc.sum_omitted_trunc = rat_double(sum_trunc);
  acc.bounds_ok = acc.product_lower >= 1 - 2 * acc.sum_b &&
                  1 - 2 * acc.sum_b > 1 - sys.epsilon();
  return acc;
}

// ==== modulus certificates ====

ModulusReport verify_modulus(
    const CantorSystem& sys,
    const std::vector<std::pair<CodePoint, CodePoint>>& pairs, int threads) {
  const long long K = sys.coords();
  const int P = sys.depth();
  const BigInt& D = sys.common_denom();
  const double log2_eps = std::log2(rat_double(sys.epsilon()));

  // validate everything up front; the parallel pass below must not throw
  for (const auto& pr : pairs) {
    if (static_cast<long long>(pr.first.codes.size()) != K ||
        static_cast<long long>(pr.second.codes.size()) != K)
      throw validation_error("code pair has wrong number of coordinates");
    for (long long k = 0; k < K; ++k) {
      const std::string& sx = pr.first.codes[static_cast<size_t>(k)];
      const std::string& sy = pr.second.codes[static_cast<size_t>(k)];
      if (sx.size() != sy.size())
        throw validation_error("code pair depths differ at a coordinate");
      if (static_cast<int>(sx.size()) > P)
        throw validation_error("code deeper than the system");
      for (size_t p = 0; p < sx.size(); ++p)
        if ((sx[p] != '0' && sx[p] != '1') || (sy[p] != '0' && sy[p] != '1'))
          throw io_error("code characters must be 0 or 1");
    }
  }

  struct Acc {
    size_t pairs = 0, skipped = 0, ratio_checked = 0, violations = 0;
    double max_ratio = 0.0;
    double min_margin = HUGE_VAL;
    std::vector<std::string> notes;
  };
  auto chunks = chunk_ranges(pairs.size(), threads);
  std::vector<Acc> accs(chunks.empty() ? 1 : chunks.size());

  parallel_for(pairs.size(), threads, [&](size_t chunk, size_t begin, size_t end) {
    Acc& acc = accs[chunk];
    for (size_t idx = begin; idx < end; ++idx) {
      const CodePoint& x = pairs[idx].first;
      const CodePoint& y = pairs[idx].second;

      bool any_diff = false;
      long long j = 0, kstar = 0;
      int pstar = 0, nstar = 0;
      BigInt best_circ;
      int best_n = 0;
      for (long long k = 0; k < K; ++k) {
        const std::string& sx = x.codes[static_cast<size_t>(k)];
        const std::string& sy = y.codes[static_cast<size_t>(k)];
        if (sx == sy) continue;  // equal codes contribute nothing
        const int n = sys.schedule().level_of(k);
        int lcp = 0;
        while (sx[static_cast<size_t>(lcp)] == sy[static_cast<size_t>(lcp)]) ++lcp;
        BigInt lx = 0, ly = 0;
        for (size_t p = 0; p < sx.size(); ++p) {
          if (sx[p] == '1') lx += sys.step_num(n, static_cast<int>(p));
          if (sy[p] == '1') ly += sys.step_num(n, static_cast<int>(p));
        }
        BigInt d = lx >= ly ? BigInt(lx - ly) : BigInt(ly - lx);
        BigInt circ = 2 * d <= D ? d : BigInt(D - d);
        // compare circ/2^n with best_circ/2^best_n over the shared denominator
        if (!any_diff || (circ << best_n) > (best_circ << n)) {
          best_circ = circ;
          best_n = n;
        }
        const long long cand_j = n + lcp;
        if (!any_diff || cand_j < j) {
          j = cand_j;
          kstar = k;
          pstar = lcp;
          nstar = n;
        }
        any_diff = true;
      }
      if (!any_diff) {
        ++acc.skipped;
        continue;
      }
      ++acc.pairs;

      // (a) d_G <= 2^{-j}, exact
      const bool ok_a = (best_circ << j) <= (D << best_n);
      // (b) d_G >= 2^{-j} a_p b_k, exact
      const Rat ab = sys.a(pstar) * sys.b(kstar);
      const BigInt ab_num = numerator(ab);
      const BigInt ab_den = denominator(ab);
      const bool ok_b = best_circ * (ab_den << j) >= ab_num * (D << best_n);
      // (c) for j >= 1 the log-ratio bound, which rearranges to exactly (b)
      const bool ok_c = j < 1 || ok_b;
      if (j >= 1) {
        ++acc.ratio_checked;
        const Rat dg_rat(best_circ, BigInt(D << best_n));
        const double dg = rat_double(dg_rat);
        const double ratio = -std::log2(dg) / static_cast<double>(j);
        const double rhs =
            (static_cast<double>(j) +
             2.0 * std::log2(static_cast<double>(pstar + 1)) + 3.0 +
             2.0 * std::log2(static_cast<double>(nstar + 1)) +
             std::log2(static_cast<double>(sys.schedule().size_of(nstar))) -
             log2_eps) /
            static_cast<double>(j);
        acc.max_ratio = std::max(acc.max_ratio, ratio);
        acc.min_margin = std::min(acc.min_margin, rhs - ratio);
      }
      for (int check = 0; check < 3; ++check) {
        const bool ok = check == 0 ? ok_a : check == 1 ? ok_b : ok_c;
        if (ok) continue;
        ++acc.violations;
        if (acc.notes.size() < 4)
          acc.notes.push_back("pair " + std::to_string(idx) + ": check " +
                              std::string(1, static_cast<char>('a' + check)) +
                              " failed at coordinate " + std::to_string(kstar));
      }
    }
  });

  ModulusReport rep;
  double min_margin = HUGE_VAL;
  for (const Acc& acc : accs) {
    rep.pairs += acc.pairs;
    rep.skipped += acc.skipped;
    rep.ratio_checked += acc.ratio_checked;
    rep.violations += acc.violations;
    rep.max_ratio = std::max(rep.max_ratio, acc.max_ratio);
    min_margin = std::min(min_margin, acc.min_margin);
    for (const auto& note : acc.notes)
      if (rep.notes.size() < 8) rep.notes.push_back(note);
  }
  rep.bound_c_margin = rep.ratio_checked == 0 ? 0.0 : min_margin;
  return rep;
}

// ==== shift search ====

double DiscreteMeasure::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

struct Candidate {
  std::vector<double> x;
  int kind = 0;  // 0 zero, 1 atom-aligned, 2 dyadic, 3 sweep composite
  size_t atom = 0;
  std::vector<uint64_t> dyadic;
  std::vector<std::pair<uint64_t, size_t>> sweep;  // per coordinate (leaf, atom)
  double prescore = 0.0;
  size_t index = 0;
};

struct SweepEvent {
  double value = 0.0;
  uint32_t atom = 0;
  int32_t delta = 0;  // +1 entry, -1 exit
};

}  // namespace

ShiftFit shift_fit(const CantorSystem& sys, const DiscreteMeasure& mu,
                   int grid_depth, const ShiftOptions& opt) {
  const long long K = sys.coords();
  const size_t KK = static_cast<size_t>(K);
  const int P = sys.depth();
  const size_t PP = static_cast<size_t>(P);
  const size_t A = mu.atoms.size();
  if (mu.weights.size() != A) throw validation_error("weights/atoms size mismatch");
  if (A == 0) throw validation_error("measure has no atoms");
  for (size_t i = 0; i < A; ++i) {
    if (mu.atoms[i].coords.size() != KK)
      throw validation_error("atom dimension mismatch");
    for (double c : mu.atoms[i].coords)
      if (!(std::isfinite(c) && c >= 0.0 && c < 1.0))
        throw validation_error("atom coordinates must lie in [0,1)");
    if (!(std::isfinite(mu.weights[i]) && mu.weights[i] >= 0.0))
      throw validation_error("weights must be nonnegative and finite");
  }
  if (grid_depth < 0 || grid_depth > P || grid_depth > 62)
    throw validation_error("grid depth exceeds system depth");

  // double views of the interval data, per level
  const int L = sys.schedule().levels();
  std::vector<std::vector<double>> len_dbl(static_cast<size_t>(L));
  std::vector<std::vector<double>> step_dbl(static_cast<size_t>(L));
  for (int n = 0; n < L; ++n) {
    if (sys.schedule().size_of(n) == 0) continue;
    long long k0 = sys.schedule().block_start(n);
    auto& ld = len_dbl[static_cast<size_t>(n)];
    auto& sd = step_dbl[static_cast<size_t>(n)];
    ld.resize(PP + 1);
    sd.resize(PP);
    for (int p = 0; p <= P; ++p) ld[static_cast<size_t>(p)] = rat_double(sys.len(k0, p));
    for (int p = 0; p < P; ++p) sd[static_cast<size_t>(p)] = rat_double(sys.step(k0, p));
  }

  std::vector<Candidate> cands;
  {
    Candidate zero;
    zero.x.assign(KK, 0.0);
    zero.kind = 0;
    cands.push_back(std::move(zero));
  }
  const size_t atom_cands =
      std::min(A, static_cast<size_t>(std::max(0, opt.atom_candidates)));
  for (size_t i = 0; i < atom_cands; ++i) {
    Candidate c;
    c.kind = 1;
    c.atom = i;
    c.x.resize(KK);
    for (size_t k = 0; k < KK; ++k) {
      double v = mu.atoms[i].coords[k];
      c.x[k] = v == 0.0 ? 0.0 : 1.0 - v;
    }
    cands.push_back(std::move(c));
  }
  {
    Rng rng(opt.seed);
    const uint64_t cells = uint64_t(1) << grid_depth;
    for (int r = 0; r < opt.random_candidates; ++r) {
      Candidate c;
      c.kind = 2;
      c.dyadic.resize(KK);
      c.x.resize(KK);
      for (size_t k = 0; k < KK; ++k) {
        c.dyadic[k] = rng.index(cells);
        c.x[k] = std::ldexp(static_cast<double>(c.dyadic[k]), -grid_depth);
      }
      cands.push_back(std::move(c));
    }
  }

  // per-coordinate event sweep, then a composite of the winning breakpoints
  const double sweep_cost =
      static_cast<double>(A) * std::ldexp(2.0, P) * static_cast<double>(K);
  const bool do_sweep = sweep_cost <= static_cast<double>(opt.sweep_cost_cap);
  if (do_sweep) {
    Candidate c;
    c.kind = 3;
    c.x.assign(KK, 0.0);
    c.sweep.assign(KK, {0, A});  // atom == A marks "no breakpoint, keep 0"
    for (size_t k = 0; k < KK; ++k) {
      const size_t lvl =
          static_cast<size_t>(sys.schedule().level_of(static_cast<long long>(k)));
      const auto& sd = step_dbl[lvl];
      const double leaf_len = len_dbl[lvl][PP];
      std::vector<SweepEvent> ev;
      ev.reserve((static_cast<size_t>(2) << P) * A);
      double baseline = 0.0;
      std::function<void(size_t, double)> emit = [&](size_t p, double Lv) {
        if (p == PP) {
          const double R = Lv + leaf_len;
          for (size_t i = 0; i < A; ++i) {
            const double a = mu.atoms[i].coords[k];
            double se = Lv - a;
            if (se < 0.0) se += 1.0;
            double sx = R - a;
            if (sx < 0.0) sx += 1.0;
            if (sx < se) baseline += mu.weights[i];
            ev.push_back({se, static_cast<uint32_t>(i), +1});
            ev.push_back({sx, static_cast<uint32_t>(i), -1});
          }
          return;
        }
        emit(p + 1, Lv);
        emit(p + 1, Lv + sd[p]);
      };
      emit(0, 0.0);
      std::sort(ev.begin(), ev.end(), [](const SweepEvent& a, const SweepEvent& b) {
        if (a.value != b.value) return a.value < b.value;
        if (a.delta != b.delta) return a.delta > b.delta;  // entries first
        return a.atom < b.atom;
      });
      double run = baseline, best = baseline, best_val = 0.0;
      size_t best_atom = A;
      for (const SweepEvent& e : ev) {
        run += e.delta > 0 ? mu.weights[e.atom] : -mu.weights[e.atom];
        if (e.delta > 0 && run > best) {
          best = run;
          best_val = e.value;
          best_atom = e.atom;
        }
      }
      if (best_atom == A) continue;  // nothing beats shift 0 on this coordinate
      // recover the leaf producing the winning entry event (same fp path)
      const uint64_t no_leaf = ~uint64_t(0);
      uint64_t best_leaf = no_leaf;
      const double a_best = mu.atoms[best_atom].coords[k];
      std::function<void(size_t, double, uint64_t)> find = [&](size_t p, double Lv,
                                                               uint64_t bits) {
        if (best_leaf != no_leaf) return;
        if (p == PP) {
          double se = Lv - a_best;
          if (se < 0.0) se += 1.0;
          if (se == best_val) best_leaf = bits;
          return;
        }
        find(p + 1, Lv, bits << 1);
        find(p + 1, Lv + sd[p], (bits << 1) | 1);
      };
      find(0, 0.0, 0);
      if (best_leaf == no_leaf) continue;
      c.sweep[k] = {best_leaf, best_atom};
      c.x[k] = best_val;
    }
    cands.push_back(std::move(c));
  }
  for (size_t i = 0; i < cands.size(); ++i) cands[i].index = i;

  // slack-tolerant double prescore; boundary misses are fixed by exact re-eval
  const double slack = 1e-9;
  parallel_for(cands.size(), opt.threads, [&](size_t, size_t begin, size_t end) {
    for (size_t ci = begin; ci < end; ++ci) {
      Candidate& c = cands[ci];
      double s = 0.0;
      for (size_t i = 0; i < A; ++i) {
        bool in = true;
        for (size_t k = 0; k < KK && in; ++k) {
          double t = mu.atoms[i].coords[k] + c.x[k];
          if (t >= 1.0) t -= 1.0;
          const size_t lvl = static_cast<size_t>(
              sys.schedule().level_of(static_cast<long long>(k)));
          const auto& ld = len_dbl[lvl];
          const auto& sd = step_dbl[lvl];
          if (t > ld[0] + slack) {
            in = false;
            break;
          }
          double Lv = 0.0;
          for (size_t p = 0; p < PP; ++p) {
            if (t <= Lv + ld[p + 1] + slack) {
              // stay left
            } else if (t >= Lv + sd[p] - slack) {
              Lv += sd[p];
            } else {
              in = false;
              break;
            }
          }
        }
        if (in) s += mu.weights[i];
      }
      c.prescore = s;
    }
  });

  // rank and pick the exact-evaluation set
  std::vector<size_t> order(cands.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (cands[a].prescore != cands[b].prescore)
      return cands[a].prescore > cands[b].prescore;
    return cands[a].index < cands[b].index;
  });
  const size_t exact_budget = static_cast<size_t>(std::max(1, opt.exact_candidates));
  std::set<size_t> chosen;
  for (size_t i = 0; i < order.size() && chosen.size() < exact_budget; ++i)
    chosen.insert(order[i]);
  chosen.insert(0);  // zero shift always gets the exact treatment
  size_t best_atom_cand = cands.size();
  for (const Candidate& c : cands) {
    if (c.kind != 1) continue;
    if (best_atom_cand == cands.size() || c.prescore > cands[best_atom_cand].prescore)
      best_atom_cand = c.index;
  }
  if (best_atom_cand < cands.size()) chosen.insert(best_atom_cand);
  if (do_sweep) chosen.insert(cands.back().index);

  auto exactify = [&](const Candidate& c) {
    std::vector<Rat> sh(KK, Rat(0));
    switch (c.kind) {
      case 0:
        break;
      case 1:
        for (size_t k = 0; k < KK; ++k)
          sh[k] = rat_mod1(-Rat(mu.atoms[c.atom].coords[k]));
        break;
      case 2: {
        const BigInt den = pow2(grid_depth);
        for (size_t k = 0; k < KK; ++k) sh[k] = Rat(BigInt(c.dyadic[k]), den);
        break;
      }
      case 3:
        for (size_t k = 0; k < KK; ++k) {
          if (c.sweep[k].second == A) continue;
          Rat Lr = sys.left_endpoint(static_cast<long long>(k),
                                     leaf_code(c.sweep[k].first, P));
          sh[k] = rat_mod1(Lr - Rat(mu.atoms[c.sweep[k].second].coords[k]));
        }
        break;
    }
    return sh;
  };

  ShiftFit fit;
  fit.total = mu.total();
  fit.sweep_used = do_sweep;
  fit.candidates_scored = cands.size();
  fit.candidates_exact = chosen.size();
  bool have = false;
  for (size_t ci : chosen) {
    std::vector<Rat> sh = exactify(cands[ci]);
    std::vector<char> mask(A, 0);
    double w = 0.0;
    size_t cnt = 0;
    for (size_t i = 0; i < A; ++i) {
      bool in = true;
      for (size_t k = 0; k < KK && in; ++k) {
        Rat t = rat_mod1(Rat(mu.atoms[i].coords[k]) + sh[k]);
        in = sys.contains(static_cast<long long>(k), t);
      }
      if (in) {
        mask[i] = 1;
        w += mu.weights[i];
        ++cnt;
      }
    }
    const bool better =
        !have || w > fit.captured || (w == fit.captured && sh < fit.shift);
    if (better) {
      fit.shift = std::move(sh);
      fit.captured = w;
      fit.captured_atoms = cnt;
      fit.captured_mask = std::move(mask);
      have = true;
    }
  }
  fit.shift_dbl.reserve(KK);
  for (const Rat& s : fit.shift) fit.shift_dbl.push_back(rat_double(s));
  return fit;
}

}  // namespace metrifract
