#include "metrifract/holder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "metrifract/embedding.hpp"
#include "metrifract/report.hpp"

namespace metrifract {

// ==== empirical modulus fitting ====

ModulusFit modulus_fit(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 10)
    throw validation_error("modulus fit needs at least 10 pairs");
  std::vector<double> xs, ys;
  size_t dropped = 0;
  for (const auto& [dx, dy] : pairs) {
    if (!(std::isfinite(dx) && std::isfinite(dy)) || dx < 0.0 || dy < 0.0)
      throw validation_error("distances must be finite and nonnegative");
    if (dx == 0.0) {
      if (dy > 0.0)
        throw validation_error("d_Y > 0 at d_X == 0: not a map of the metric");
      ++dropped;
      continue;
    }
    if (dy == 0.0) {
      ++dropped;
      continue;
    }
    xs.push_back(std::log(dx));
    ys.push_back(std::log(dy));
  }
  if (xs.size() < 2) throw validation_error("too few pairs with both distances positive");

  double mean_x = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(xs.size());
  mean_y /= static_cast<double>(xs.size());

  // grid of slopes; at each slope the intercept is pulled down onto the point
  // set and the winner minimizes the mean slack (ties keep the least slope)
  ModulusFit fit;
  fit.pairs_used = xs.size();
  fit.dropped = dropped;
  double best_obj = 0.0;
  bool first = true;
  for (int k = 0; k <= 598; ++k) {
    const double beta = static_cast<double>(10 + 5 * k) / 1000.0;
    double c = -HUGE_VAL;
    for (size_t i = 0; i < xs.size(); ++i) c = std::max(c, ys[i] - beta * xs[i]);
    const double obj = beta * mean_x + c - mean_y;
    if (first || obj < best_obj) {
      first = false;
      best_obj = obj;
      fit.beta_hat = beta;
      fit.log_constant = c;
    }
  }
  double resid = -HUGE_VAL;
  for (size_t i = 0; i < xs.size(); ++i)
    resid = std::max(resid, ys[i] - fit.beta_hat * xs[i] - fit.log_constant);
  fit.max_residual = resid;
  return fit;
}

// ==== minimal extensions of sampled maps ====

void SampledMap::validate(size_t source_size) const {
  if (anchors.empty()) throw validation_error("no anchors");
  const size_t t = anchors[0].second.size();
  if (t == 0) throw validation_error("anchor targets must have a dimension");
  std::set<size_t> seen;
  for (const auto& [idx, val] : anchors) {
    if (idx >= source_size) throw validation_error("anchor index out of range");
    if (!seen.insert(idx).second)
      throw validation_error("duplicate anchor index " + std::to_string(idx));
    if (val.size() != t) throw validation_error("anchor target dimension mismatch");
    for (double v : val)
      if (!std::isfinite(v)) throw validation_error("anchor values must be finite");
  }
}

namespace {

// Nondecrease and subadditivity of h on observed distances; power gauges
// with exponent <= 1 pass analytically.
void check_extension_gauge(const Gauge& h, std::vector<double> pool) {
  if (h.form() == GaugeForm::pow && h.beta() <= 1.0) return;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  while (!pool.empty() && pool.front() <= 0.0) pool.erase(pool.begin());
  if (pool.size() > 200) {
    // thin deterministically, keeping the extremes
    std::vector<double> thin;
    for (size_t i = 0; i < 200; ++i)
      thin.push_back(pool[i * (pool.size() - 1) / 199]);
    pool = std::move(thin);
  }
  for (size_t i = 1; i < pool.size(); ++i)
    if (h(pool[i]) < h(pool[i - 1]))
      throw validation_error("gauge decreases between r = " +
                             std::to_string(pool[i - 1]) + " and r = " +
                             std::to_string(pool[i]));
  for (size_t i = 0; i < pool.size(); ++i)
    for (size_t j = i; j < pool.size(); ++j) {
      const double a = pool[i], b = pool[j];
      const double lhs = h(a + b), rhs = h(a) + h(b);
      if (lhs > rhs * (1.0 + 1e-9))
        throw validation_error("gauge not subadditive at r = " +
                               std::to_string(a) + " + " + std::to_string(b));
    }
}

}  // namespace

std::vector<std::vector<double>> mcshane_extend(const SampledMap& anchors,
                                                const Gauge& h,
                                                const PointCloud& source,
                                                const std::vector<size_t>& queries,
                                                int threads) {
  anchors.validate(source.size());
  for (size_t q : queries)
    if (q >= source.size()) throw validation_error("query index out of range");
  const auto& as = anchors.anchors;
  const size_t A = as.size();
  const size_t T = anchors.target_dim();

  std::vector<double> pool;
  for (size_t a = 0; a < A; ++a)
    for (size_t b = a + 1; b < A; ++b) pool.push_back(source.dist(as[a].first, as[b].first));
  for (size_t qi = 0; qi < queries.size() && qi < 256; ++qi)
    pool.push_back(source.dist(queries[qi], as[qi % A].first));
  check_extension_gauge(h, std::move(pool));

  // anchors must already satisfy the modulus; d == 0 needs equal values
  for (size_t a = 0; a < A; ++a)
    for (size_t b = a + 1; b < A; ++b) {
      const double d = source.dist(as[a].first, as[b].first);
      const double cap = d == 0.0 ? 0.0 : h(d);
      for (size_t c = 0; c < T; ++c) {
        const double diff = std::fabs(as[a].second[c] - as[b].second[c]);
        if (diff > cap)
          throw validation_error(
              "anchor modulus violation between indices " +
              std::to_string(as[a].first) + " and " + std::to_string(as[b].first) +
              " at coordinate " + std::to_string(c) + ": |df| = " +
              std::to_string(diff) + " > " + std::to_string(cap));
      }
    }

  std::vector<std::vector<double>> out(queries.size(), std::vector<double>(T, 0.0));
  parallel_for(queries.size(), threads, [&](size_t, size_t begin, size_t end) {
    for (size_t qi = begin; qi < end; ++qi) {
      const size_t x = queries[qi];
      for (size_t c = 0; c < T; ++c) out[qi][c] = HUGE_VAL;
      for (size_t a = 0; a < A; ++a) {
        const double d = source.dist(x, as[a].first);
        const double lift = d == 0.0 ? 0.0 : h(d);
        for (size_t c = 0; c < T; ++c)
          out[qi][c] = std::min(out[qi][c], as[a].second[c] + lift);
      }
    }
  });
  return out;
}

// ==== space-filling surjections ====

namespace {

void validate_curve(int m, int order) {
  if (m < 2) throw validation_error("curve dimension must be at least 2");
  if (order < 1 || order > 20) throw validation_error("order must lie in [1, 20]");
  if (m * order > 62) throw validation_error("m * order must stay below 63 bits");
}

}  // namespace

std::vector<uint64_t> hilbert_cell(int m, int order, uint64_t index) {
  validate_curve(m, order);
  if (index >= (uint64_t(1) << (m * order)))
    throw validation_error("cell index out of range");

  // transpose form: X[i] holds every m-th bit of the index, MSB planes first
  std::vector<uint32_t> X(static_cast<size_t>(m), 0);
  for (int q = 0; q < order; ++q)
    for (int i = 0; i < m; ++i) {
      const int sbit = m * order - 1 - (q * m + i);
      const uint32_t bit = static_cast<uint32_t>((index >> sbit) & 1u);
      X[static_cast<size_t>(i)] |= bit << (order - 1 - q);
    }

  // Gray decode, then peel the reflections scale by scale
  const uint32_t top = uint32_t(2) << (order - 1);
  uint32_t t = X[static_cast<size_t>(m - 1)] >> 1;
  for (int i = m - 1; i > 0; --i) X[static_cast<size_t>(i)] ^= X[static_cast<size_t>(i - 1)];
  X[0] ^= t;
  for (uint32_t q = 2; q != top; q <<= 1) {
    const uint32_t p = q - 1;
    for (int i = m - 1; i >= 0; --i) {
      if (X[static_cast<size_t>(i)] & q) {
        X[0] ^= p;
      } else {
        const uint32_t swap = (X[0] ^ X[static_cast<size_t>(i)]) & p;
        X[0] ^= swap;
        X[static_cast<size_t>(i)] ^= swap;
      }
    }
  }
  return std::vector<uint64_t>(X.begin(), X.end());
}

std::vector<double> hilbert_curve(int m, int order, double t) {
  validate_curve(m, order);
  if (!(std::isfinite(t) && t >= 0.0 && t <= 1.0))
    throw validation_error("curve parameter must lie in [0, 1]");
  const uint64_t cells = uint64_t(1) << (m * order);
  const long double u = static_cast<long double>(t) * static_cast<long double>(cells - 1);
  uint64_t i = static_cast<uint64_t>(u);
  if (i >= cells - 1) i = cells - 2;
  const double frac = static_cast<double>(u - static_cast<long double>(i));

  const auto a = hilbert_cell(m, order, i);
  const auto b = hilbert_cell(m, order, i + 1);
  const double scale = std::ldexp(1.0, -order);
  std::vector<double> out(static_cast<size_t>(m), 0.0);
  for (int c = 0; c < m; ++c) {
    const double lo = static_cast<double>(a[static_cast<size_t>(c)]) * scale;
    const double hi = static_cast<double>(b[static_cast<size_t>(c)]) * scale;
    out[static_cast<size_t>(c)] = lo + frac * (hi - lo);
  }
  return out;
}

std::vector<double> interleave_map(const std::vector<double>& x, int m,
                                   int precision) {
  const int n = static_cast<int>(x.size());
  if (n < 1) throw validation_error("input point must have a dimension");
  if (m < n) throw validation_error("target dimension must be at least the source");
  if (precision < 1 || precision * n > 52)
    throw validation_error("precision must lie in [1, 52/n]");
  for (double v : x)
    if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0))
      throw validation_error("coordinates must lie in [0, 1]");

  const uint64_t full = uint64_t(1) << precision;
  std::vector<uint64_t> digits(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    uint64_t v = static_cast<uint64_t>(x[static_cast<size_t>(i)] *
                                       static_cast<double>(full));
    if (v >= full) v = full - 1;
    digits[static_cast<size_t>(i)] = v;
  }

  std::vector<double> out(static_cast<size_t>(m), 0.0);
  std::vector<int> placed(static_cast<size_t>(m), 0);
  for (int s = 0; s < n * precision; ++s) {
    const int coord = s % n;
    const int plane = s / n;
    const uint64_t bit =
        (digits[static_cast<size_t>(coord)] >> (precision - 1 - plane)) & 1u;
    const int j = s % m;
    ++placed[static_cast<size_t>(j)];
    if (bit)
      out[static_cast<size_t>(j)] += std::ldexp(1.0, -placed[static_cast<size_t>(j)]);
  }
  return out;
}

// ==== the composed mapping pipeline ====

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return std::sqrt(s);
}

// largest q with every dyadic 2^-q cell of [0,1]^m touched by some value
int coverage_resolution(const std::vector<std::vector<double>>& values, int m) {
  int achieved = 0;
  for (int q = 1; q * m <= 24; ++q) {
    const uint64_t side = uint64_t(1) << q;
    std::set<uint64_t> cells;
    for (const auto& v : values) {
      uint64_t key = 0;
      for (int c = 0; c < m; ++c) {
        double scaled = std::floor(v[static_cast<size_t>(c)] * static_cast<double>(side));
        long long cell = static_cast<long long>(scaled);
        if (cell < 0) cell = 0;
        if (cell >= static_cast<long long>(side)) cell = static_cast<long long>(side) - 1;
        key = key * side + static_cast<uint64_t>(cell);
      }
      cells.insert(key);
    }
    if (cells.size() != (uint64_t(1) << (q * m))) break;
    achieved = q;
  }
  return achieved;
}

}  // namespace

Json CubeMapResult::to_json() const {
  Json moduli = Json::object();
  moduli.set("embed_max_ratio", Json::real(stage_moduli.embed_max_ratio));
  moduli.set("embed_min_band_ratio", Json::real(stage_moduli.embed_min_band_ratio));
  moduli.set("code_max_ratio", Json::real(stage_moduli.code_max_ratio));
  moduli.set("extension_beta", Json::real(stage_moduli.extension_beta));
  Json root = Json::object();
  root.set("captured_fraction", Json::real(captured_fraction));
  root.set("grid_resolution", Json::integer(grid_resolution));
  root.set("beta_hat", Json::real(beta_hat));
  root.set("stage_moduli", std::move(moduli));
  root.set("substitute_construction", Json::boolean(substitute_construction));
  root.set("degenerate", Json::boolean(degenerate));
  return root;
}

CubeMapResult map_onto_cube(const PointCloud& cloud,
                            const std::vector<double>& weights, int m,
                            const CubeMapOptions& opt) {
  if (m < 1) throw validation_error("target dimension must be positive");
  if (cloud.size() == 0) throw validation_error("empty cloud");
  if (m >= 2) validate_curve(m, opt.order);
  std::vector<double> w = weights;
  if (w.empty()) w.assign(cloud.size(), 1.0);
  if (w.size() != cloud.size()) throw validation_error("one weight per point");
  for (double v : w)
    if (!(std::isfinite(v) && v >= 0.0))
      throw validation_error("weights must be finite and nonnegative");

  const size_t n = cloud.size();
  CubeMapResult res;
  res.values.assign(n, std::vector<double>(static_cast<size_t>(m), 0.5));
  if (n == 1) {
    res.degenerate = true;
    res.captured_fraction = 1.0;
    return res;
  }

  auto emb = embed_cloud(cloud, opt.n_min, opt.n_max);
  auto certs = distortion_report(cloud, emb, opt.threads);
  res.stage_moduli.embed_max_ratio = certs.max_ratio;
  res.stage_moduli.embed_min_band_ratio = certs.min_band_ratio;

  auto sys = CantorSystem::build(opt.epsilon, emb.schedule, opt.depth);
  DiscreteMeasure mu;
  mu.atoms = emb.images;
  mu.weights = w;
  ShiftOptions sopt;
  sopt.seed = opt.seed;
  sopt.threads = opt.threads;
  auto fit = shift_fit(sys, mu, opt.grid_depth, sopt);
  res.captured_fraction = fit.total > 0.0 ? fit.captured / fit.total : 0.0;

  std::vector<size_t> carriers;
  std::vector<CodePoint> codes;
  for (size_t i = 0; i < n; ++i) {
    if (!fit.captured_mask[i]) continue;
    auto code = sys.locate(mu.atoms[i], fit.shift);
    if (!code) throw std::logic_error("captured atom fell outside the system");
    carriers.push_back(i);
    codes.push_back(std::move(*code));
  }
  if (carriers.empty()) {
    res.degenerate = true;
    return res;
  }

  // lexicographic code order, then the midpoint of each code's count slice
  std::map<std::string, size_t> multiplicity;
  std::vector<std::string> keys(carriers.size());
  for (size_t ci = 0; ci < carriers.size(); ++ci) {
    std::string key;
    for (const auto& digits : codes[ci].codes) key += digits;
    keys[ci] = key;
    ++multiplicity[key];
  }
  std::map<std::string, double> slot;
  double cum = 0.0;
  const double total_count = static_cast<double>(carriers.size());
  for (const auto& [key, count] : multiplicity) {
    slot[key] = (cum + 0.5 * static_cast<double>(count)) / total_count;
    cum += static_cast<double>(count);
  }

  SampledMap anchors;
  for (size_t ci = 0; ci < carriers.size(); ++ci) {
    const double t = slot[keys[ci]];
    std::vector<double> img =
        m == 1 ? std::vector<double>{t} : hilbert_curve(m, opt.order, t);
    res.values[carriers[ci]] = img;
    anchors.anchors.emplace_back(carriers[ci], std::move(img));
  }

  Gauge base = opt.gauge ? *opt.gauge
                         : hat_transform(Gauge::pow(1.0), opt.beta).gauge;
  double stretch = 0.0;
  for (size_t a = 0; a < anchors.anchors.size(); ++a)
    for (size_t b = a + 1; b < anchors.anchors.size(); ++b) {
      const double d =
          cloud.dist(anchors.anchors[a].first, anchors.anchors[b].first);
      if (d == 0.0) continue;
      const double hd = base(d);
      for (size_t c = 0; c < static_cast<size_t>(m); ++c) {
        const double diff = std::fabs(anchors.anchors[a].second[c] -
                                      anchors.anchors[b].second[c]);
        if (hd > 0.0) stretch = std::max(stretch, diff / hd);
      }
    }
  const Gauge h = stretch > 0.0 ? base.scaled(stretch * (1.0 + 1e-9)) : base;
  res.stage_moduli.extension_beta =
      h.has_claimed_ord() ? h.claimed_ord()
                          : (h.form() == GaugeForm::pow ? h.beta() : opt.beta);

  std::vector<size_t> uncaptured;
  for (size_t i = 0; i < n; ++i)
    if (!fit.captured_mask[i]) uncaptured.push_back(i);
  if (!uncaptured.empty()) {
    auto ext = mcshane_extend(anchors, h, cloud, uncaptured, opt.threads);
    for (size_t qi = 0; qi < uncaptured.size(); ++qi)
      res.values[uncaptured[qi]] = std::move(ext[qi]);
  }

  // code-to-torus certificate on sampled captured pairs
  if (codes.size() >= 2) {
    std::vector<std::pair<CodePoint, CodePoint>> cpairs;
    const size_t want = std::min<size_t>(500, codes.size() * (codes.size() - 1) / 2);
    if (codes.size() <= 32) {
      for (size_t a = 0; a < codes.size(); ++a)
        for (size_t b = a + 1; b < codes.size(); ++b)
          cpairs.emplace_back(codes[a], codes[b]);
    } else {
      Rng rng(opt.seed + 2);
      while (cpairs.size() < want) {
        const size_t a = rng.index(codes.size());
        const size_t b = rng.index(codes.size());
        if (a == b) continue;
        cpairs.emplace_back(codes[a], codes[b]);
      }
    }
    res.stage_moduli.code_max_ratio =
        verify_modulus(sys, cpairs, opt.threads).max_ratio;
  }

  // empirical modulus of the finished map
  std::vector<std::pair<double, double>> mpairs;
  if (n * (n - 1) / 2 <= opt.modulus_pairs) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        mpairs.emplace_back(cloud.dist(i, j), euclid(res.values[i], res.values[j]));
  } else {
    Rng rng(opt.seed + 1);
    while (mpairs.size() < opt.modulus_pairs) {
      const size_t i = rng.index(n);
      const size_t j = rng.index(n);
      if (i == j) continue;
      mpairs.emplace_back(cloud.dist(i, j), euclid(res.values[i], res.values[j]));
    }
  }
  size_t usable = 0;
  for (const auto& [dx, dy] : mpairs)
    if (dx > 0.0 && dy > 0.0) ++usable;
  if (mpairs.size() >= 10 && usable >= 2) {
    res.beta_hat = modulus_fit(mpairs).beta_hat;
  }

  res.grid_resolution = coverage_resolution(res.values, m);
  return res;
}

}  // namespace metrifract
