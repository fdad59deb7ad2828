#include "metrifract/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metrifract/report.hpp"

namespace metrifract {

// ==== evaluation ====

double power_eval(double r, double beta) {
  if (beta == 1.0) return r;
  if (beta == 2.0) return r * r;
  if (beta == 0.5) return std::sqrt(r);
  return std::pow(r, beta);
}

namespace {

void require_exponent(double beta) {
  if (!std::isfinite(beta) || beta <= 0.0)
    throw validation_error("gauge exponent must be positive and finite, got " +
                           std::to_string(beta));
}

}  // namespace

Gauge Gauge::pow(double beta) {
  require_exponent(beta);
  Gauge g;
  g.form_ = GaugeForm::pow;
  g.beta_ = beta;
  g.claimed_ = beta;
  return g;
}

Gauge Gauge::logpow(double beta, double gamma) {
  require_exponent(beta);
  if (!std::isfinite(gamma))
    throw validation_error("logpow second parameter must be finite");
  Gauge g;
  g.form_ = GaugeForm::logpow;
  g.beta_ = beta;
  g.gamma_ = gamma;
  g.claimed_ = beta;
  return g;
}

Gauge Gauge::table(std::vector<double> r, std::vector<double> h) {
  if (r.size() != h.size()) throw validation_error("table gauge: r and h sizes differ");
  if (r.size() < 2) throw validation_error("table gauge needs at least 2 knots");
  for (size_t i = 0; i < r.size(); ++i) {
    if (!std::isfinite(r[i]) || r[i] <= 0.0)
      throw validation_error("table gauge: knot radii must be positive and finite");
    if (!std::isfinite(h[i]) || h[i] <= 0.0)
      throw validation_error("table gauge: values must be positive and finite");
    if (i > 0 && !(r[i] > r[i - 1]))
      throw validation_error("table gauge: radii must be strictly ascending");
    if (i > 0 && h[i] < h[i - 1])
      throw validation_error("table gauge: values must be nondecreasing");
  }
  Gauge g;
  g.form_ = GaugeForm::table;
  g.r_ = std::move(r);
  g.h_ = std::move(h);
  g.lr_.resize(g.r_.size());
  g.lh_.resize(g.h_.size());
  for (size_t i = 0; i < g.r_.size(); ++i) {
    g.lr_[i] = std::log(g.r_[i]);
    g.lh_[i] = std::log(g.h_[i]);
  }
  return g;
}

Gauge Gauge::load_table(const std::string& path) {
  auto rows = read_csv(path);
  std::vector<double> r, h;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() < 2)
      throw io_error("table gauge row " + std::to_string(i) + " needs two cells in " + path);
    if (i == 0) {
      // optional header row
      try {
        parse_double(rows[i][0]);
      } catch (const io_error&) {
        continue;
      }
    }
    r.push_back(parse_double(rows[i][0]));
    h.push_back(parse_double(rows[i][1]));
  }
  if (r.size() < 2) throw io_error("table gauge needs at least 2 data rows in " + path);
  return table(std::move(r), std::move(h));
}

Gauge Gauge::parse(const std::string& spec) {
  size_t colon = spec.find(':');
  if (colon == std::string::npos)
    throw io_error("gauge spec must look like form:args, got '" + spec + "'");
  std::string form = trim(spec.substr(0, colon));
  std::string args = trim(spec.substr(colon + 1));
  if (form == "pow") return pow(parse_double(args));
  if (form == "logpow") {
    auto parts = split(args, ',');
    if (parts.size() != 2) throw io_error("logpow gauge needs beta,gamma, got '" + args + "'");
    return logpow(parse_double(parts[0]), parse_double(parts[1]));
  }
  if (form == "table") return load_table(args);
  throw io_error("unknown gauge form '" + form + "'");
}

double Gauge::operator()(double r) const {
  if (!std::isfinite(r) || r <= 0.0)
    throw validation_error("gauge evaluated outside (0, inf): r = " + std::to_string(r));
  double v = 0.0;
  switch (form_) {
    case GaugeForm::pow:
      v = power_eval(r, beta_);
      break;
    case GaugeForm::logpow: {
      static const double inv_e = std::exp(-1.0);
      if (r <= inv_e) {
        double lg = std::log(1.0 / r);
        double lf = gamma_ == 0.0 ? 1.0 : (gamma_ == 1.0 ? lg : std::pow(lg, gamma_));
        v = power_eval(r, beta_) * lf;
      } else {
        // linear continuation, value and slope matched at 1/e, clamped
        // nonnegative so the gauge stays nondecreasing
        double slope = std::max(std::exp(1.0 - beta_) * (beta_ - gamma_), 0.0);
        v = std::exp(-beta_) + slope * (r - inv_e);
      }
      break;
    }
    case GaugeForm::table: {
      auto it = std::lower_bound(r_.begin(), r_.end(), r);
      size_t hi = static_cast<size_t>(it - r_.begin());
      if (it != r_.end() && *it == r) {
        v = h_[hi];
        break;
      }
      size_t seg;
      if (hi == 0)
        seg = 0;  // continue the first segment downward
      else if (hi >= r_.size())
        seg = r_.size() - 2;  // continue the last segment upward
      else
        seg = hi - 1;
      double t = (std::log(r) - lr_[seg]) / (lr_[seg + 1] - lr_[seg]);
      v = std::exp(lh_[seg] + t * (lh_[seg + 1] - lh_[seg]));
      break;
    }
  }
  return scale_ * v;
}

Gauge Gauge::scaled(double factor) const {
  if (!std::isfinite(factor) || factor <= 0.0)
    throw validation_error("gauge scale must be positive and finite");
  Gauge g = *this;
  g.scale_ *= factor;
  return g;
}

Gauge Gauge::with_claimed_ord(double value) const {
  Gauge g = *this;
  g.claimed_ = value;
  return g;
}

std::string Gauge::spec_string() const {
  switch (form_) {
    case GaugeForm::pow:
      return "pow:" + format_double(beta_);
    case GaugeForm::logpow:
      return "logpow:" + format_double(beta_) + "," + format_double(gamma_);
    case GaugeForm::table:
      return "table:" + std::to_string(r_.size()) + " knots";
  }
  return "";
}

// ==== ord estimation ====

OrdEstimate ord_estimate(const Gauge& h, int decades) {
  if (decades < 2)
    throw validation_error("ord estimate needs decades >= 2, got " + std::to_string(decades));
  OrdEstimate out;
  out.r.reserve(decades);
  out.value.reserve(decades);
  for (int k = 1; k <= decades; ++k) {
    double r = std::pow(10.0, -static_cast<double>(k));
    out.r.push_back(r);
    out.value.push_back(std::log(h(r)) / std::log(r));
  }
  // one point per decade, so the finest decade holds exactly the last entry
  out.tail_min = out.value.back();
  if (h.has_claimed_ord()) {
    out.has_claimed = true;
    out.claimed = h.claimed_ord();
  }
  return out;
}

// ==== hat transform ====

HatResult hat_transform(const Gauge& h, double beta, const HatOptions& opt) {
  require_exponent(beta);
  if (opt.decades < 2) throw validation_error("hat grid needs decades >= 2");
  if (opt.per_decade < 1) throw validation_error("hat grid needs per_decade >= 1");
  if (opt.enforce_ord) {
    auto ord = ord_estimate(h, opt.ord_decades);
    if (beta > ord.tail_min + 0.05)
      throw validation_error("exponent " + format_double(beta) +
                             " exceeds the gauge ord estimate " + format_double(ord.tail_min) +
                             " + 0.05");
  }

  const int m = opt.decades * opt.per_decade;
  std::vector<double> r(m + 1), rb(m + 1), star(m + 1), psi(m + 1);
  for (int i = 0; i <= m; ++i) {
    r[i] = std::pow(10.0, -opt.decades + i / static_cast<double>(opt.per_decade));
    rb[i] = power_eval(r[i], beta);
    star[i] = h(r[i]) + rb[i];
  }
  psi[m] = star[m] / rb[m];
  for (int i = m - 1; i >= 0; --i) psi[i] = std::max(star[i] / rb[i], psi[i + 1]);

  HatReport rep;
  rep.bounded = psi[0] / psi[m] < 1.0 + 1e-9;
  const double sup_psi = psi[0];
  if (rep.bounded) rep.sup_psi = sup_psi;

  // clamp up to h*: the envelope's own-point term can round a hair below it
  std::vector<double> hat(m + 1);
  for (int i = 0; i <= m; ++i) {
    double ideal = rep.bounded ? sup_psi * rb[i] : rb[i] * psi[i];
    hat[i] = std::max(star[i], ideal);
  }

  rep.checks.mono = true;
  for (int i = 0; i < m && rep.checks.mono; ++i)
    if (!(hat[i + 1] > hat[i])) rep.checks.mono = false;

  rep.checks.dominates = true;
  for (int i = 0; i <= m && rep.checks.dominates; ++i)
    if (!(hat[i] >= star[i])) rep.checks.dominates = false;

  // doubling holds when the envelope is nonincreasing toward small r and no
  // clamp moved a value beyond rounding noise
  rep.checks.doubling = true;
  for (int i = 0; i < m && rep.checks.doubling; ++i)
    if (!(psi[i] >= psi[i + 1])) rep.checks.doubling = false;
  for (int i = 0; i <= m && rep.checks.doubling; ++i) {
    double ideal = rep.bounded ? sup_psi * rb[i] : rb[i] * psi[i];
    if (!(hat[i] <= ideal * (1.0 + 1e-12))) rep.checks.doubling = false;
  }

  Gauge g = Gauge::table(r, hat);
  if (h.has_claimed_ord()) g = g.with_claimed_ord(std::min(beta, h.claimed_ord()));

  // subadditivity of hat^{1/beta} on sampled node pairs; the sum lands
  // between nodes and reads through the interpolant
  const double inv_beta = 1.0 / beta;
  Rng rng(opt.seed);
  double worst = 0.0;
  for (int t = 0; t < opt.triples; ++t) {
    size_t a = rng.index(static_cast<uint64_t>(m) + 1);
    size_t b = rng.index(static_cast<uint64_t>(m) + 1);
    double ux = power_eval(hat[a], inv_beta);
    double uy = power_eval(hat[b], inv_beta);
    double us = power_eval(g(r[a] + r[b]), inv_beta);
    worst = std::max(worst, us - ux - uy);
  }
  rep.max_subadd_violation = worst;
  rep.checks.subadd = worst <= opt.subadd_tol;

  return {std::move(g), rep};
}

// ==== remetrization ====

RemetrizeResult remetrize(const PointCloud& cloud, const Gauge& h, uint64_t seed) {
  const size_t n = cloud.size();
  bool analytic = h.form() == GaugeForm::pow && h.beta() <= 1.0 && h.scale() > 0.0;
  size_t samples = 0;

  if (!analytic && n >= 2) {
    std::vector<double> ds;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) {
        double d = cloud.dist(i, j);
        if (d > 0.0) ds.push_back(d);
      }
    if (!ds.empty()) {
      std::sort(ds.begin(), ds.end());
      std::vector<double> hv(ds.size());
      for (size_t i = 0; i < ds.size(); ++i) hv[i] = h(ds[i]);
      for (size_t i = 0; i + 1 < ds.size(); ++i)
        if (hv[i] > hv[i + 1] + 1e-12)
          throw validation_error("gauge decreases on the data: h(" + format_double(ds[i]) +
                                 ") = " + format_double(hv[i]) + " > h(" +
                                 format_double(ds[i + 1]) + ") = " + format_double(hv[i + 1]));
      Rng rng(seed);
      const size_t want = 10000;
      for (size_t t = 0; t < want; ++t) {
        size_t a = rng.index(ds.size());
        size_t b = rng.index(ds.size());
        double lhs = h(ds[a] + ds[b]);
        double rhs = hv[a] + hv[b];
        if (lhs > rhs + 1e-9)
          throw validation_error("gauge is not subadditive on the data: h(" +
                                 format_double(ds[a]) + " + " + format_double(ds[b]) + ") = " +
                                 format_double(lhs) + " > " + format_double(rhs));
        ++samples;
      }
    }
  }

  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double d = cloud.dist(i, j);
      double v = d > 0.0 ? h(d) : 0.0;
      rows[i][j] = v;
      rows[j][i] = v;
    }

  RemetrizeResult out{PointCloud::from_matrix(std::move(rows)), MetricCheck{}, analytic, samples};
  out.triangle = validate_metric(out.cloud, MetricLaw::triangle);
  return out;
}

}  // namespace metrifract
