#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metrifract/geometry.hpp"

namespace metrifract {

// ==== gauges ====

enum class GaugeForm { pow, logpow, table };

// A Hausdorff function: r^beta, r^beta * ln(1/r)^gamma, or a tabulated grid
// interpolated log-linearly. A positive scale multiplier applies on top.
class Gauge {
 public:
  static Gauge pow(double beta);
  static Gauge logpow(double beta, double gamma);
  // Knots ascending in r, all r and h positive, h nondecreasing.
  static Gauge table(std::vector<double> r, std::vector<double> h);
  static Gauge load_table(const std::string& path);
  // "pow:<beta>" | "logpow:<beta>,<gamma>" | "table:<path.csv>"
  static Gauge parse(const std::string& spec);

  // Evaluate at r > 0. Tables use an exact-node fast path and continue the
  // boundary segments past both ends.
  double operator()(double r) const;

  GaugeForm form() const { return form_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  double scale() const { return scale_; }
  Gauge scaled(double factor) const;
  bool has_claimed_ord() const { return claimed_.has_value(); }
  double claimed_ord() const { return *claimed_; }
  Gauge with_claimed_ord(double value) const;
  const std::vector<double>& grid_r() const { return r_; }
  const std::vector<double>& grid_h() const { return h_; }
  std::string spec_string() const;

 private:
  Gauge() = default;

  GaugeForm form_ = GaugeForm::pow;
  double beta_ = 1.0;
  double gamma_ = 0.0;
  double scale_ = 1.0;
  std::optional<double> claimed_;
  std::vector<double> r_, h_;    // table knots
  std::vector<double> lr_, lh_;  // their logs
};

// r^beta with the same value the pow gauge produces (exact specializations
// for beta = 1/2, 1, 2).
double power_eval(double r, double beta);

// ==== effective power-law exponent ====

struct OrdEstimate {
  std::vector<double> r;      // 10^-1 .. 10^-decades, one point per decade
  std::vector<double> value;  // log h(r) / log r
  double tail_min = 0.0;      // minimum over the finest decade
  bool has_claimed = false;
  double claimed = 0.0;       // exponent of closed forms
};

OrdEstimate ord_estimate(const Gauge& h, int decades);

// ==== the subadditive-envelope transform ====

struct HatOptions {
  int decades = 40;
  int per_decade = 64;
  int triples = 10000;      // subadditivity samples
  uint64_t seed = 0;
  double subadd_tol = 1e-9;
  bool enforce_ord = false;  // reject beta above the ord estimate + 0.05
  int ord_decades = 40;
};

struct HatChecks {
  bool mono = false;       // strict increase across the grid
  bool dominates = false;  // hat >= h + r^beta at every knot
  bool subadd = false;     // hat^{1/beta} subadditive on sampled triples
  bool doubling = false;   // hat(2r) <= 2^beta hat(r), via the envelope shape
};

struct HatReport {
  bool bounded = false;
  double sup_psi = 0.0;  // meaningful only when bounded
  HatChecks checks;
  double max_subadd_violation = 0.0;
  bool all_ok() const {
    return checks.mono && checks.dominates && checks.subadd && checks.doubling;
  }
};

struct HatResult {
  Gauge gauge;  // table over the grid; claims min(beta, claimed ord of h)
  HatReport report;
};

// hat(r) built from the running envelope of s^-beta * (h(s) + s^beta) over
// s in [r, 1], on a geometric grid of per_decade points per decade.
HatResult hat_transform(const Gauge& h, double beta, const HatOptions& opt = {});

// ==== gauge-driven remetrization ====

struct RemetrizeResult {
  PointCloud cloud;        // matrix mode, rho_ij = h(d_ij)
  MetricCheck triangle;    // certificate over the output
  bool subadd_analytic = false;  // pow with beta <= 1 accepted without sampling
  size_t subadd_samples = 0;
};

// Rejects h that fails nondecrease/subadditivity on sampled observed
// distances (witness in the message).
RemetrizeResult remetrize(const PointCloud& cloud, const Gauge& h, uint64_t seed = 0);

}  // namespace metrifract
