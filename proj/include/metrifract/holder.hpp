#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metrifract/cantor.hpp"
#include "metrifract/gauge.hpp"
#include "metrifract/geometry.hpp"
#include "metrifract/rational.hpp"

namespace metrifract {

// ==== empirical modulus fitting ====

// Supporting line of the log-log pair set from above: beta_hat is the grid
// slope minimizing the mean slack once the intercept is pulled tight, so
// every pair satisfies log d_Y <= beta_hat * log d_X + log_constant.
struct ModulusFit {
  size_t pairs_used = 0;
  size_t dropped = 0;  // d_Y == 0 pairs carry no log-log information
  double beta_hat = 0.0;
  double log_constant = 0.0;
  double max_residual = 0.0;  // <= 0 over used pairs by construction
};

ModulusFit modulus_fit(const std::vector<std::pair<double, double>>& pairs);

// ==== minimal extensions of sampled maps ====

struct SampledMap {
  // (source point index, target vector), no duplicate indices
  std::vector<std::pair<size_t, std::vector<double>>> anchors;

  size_t target_dim() const {
    return anchors.empty() ? 0 : anchors[0].second.size();
  }
  void validate(size_t source_size) const;
};

// Coordinatewise f*(x) = min over anchors z of f(z) + h(d(x,z)), with the
// d == 0 term read as f(z) alone. Anchors must satisfy the modulus
// |f(z)-f(z')| <= h(d(z,z')) per coordinate (checked, witness reported);
// anchor queries then return their own values exactly.
std::vector<std::vector<double>> mcshane_extend(const SampledMap& anchors,
                                                const Gauge& h,
                                                const PointCloud& source,
                                                const std::vector<size_t>& queries,
                                                int threads = 1);

// ==== space-filling surjections ====

// Lattice corner of cell `index` on the order-p m-dimensional Hilbert curve.
std::vector<uint64_t> hilbert_cell(int m, int order, uint64_t index);

// Piecewise-linear trace through the 2^{m*order} cell corners scaled by
// 2^{-order}; t = 0 lands on the origin corner.
std::vector<double> hilbert_curve(int m, int order, double t);

// First `precision` binary digits of each input coordinate, interleaved
// round-robin into a stream and dealt round-robin to m output coordinates.
// Measurable but discontinuous across the dyadic mesh; away from mesh
// boundaries pairs obey the n/m-power modulus up to constant 2.
std::vector<double> interleave_map(const std::vector<double>& x, int m,
                                   int precision);

// ==== the composed mapping pipeline ====

struct CubeMapOptions {
  int n_min = 0;          // embedding scale range
  int n_max = 3;
  Rat epsilon = Rat(1, 10);
  int depth = 12;         // interval system depth
  int grid_depth = 12;    // shift search grid, at most `depth`
  int order = 8;          // Hilbert order for m >= 2
  double beta = 0.9;      // extension gauge exponent when no gauge is given
  std::optional<Gauge> gauge;
  uint64_t seed = 0;
  int threads = 1;
  size_t modulus_pairs = 2000;
};

struct StageModuli {
  double embed_max_ratio = 0.0;      // distortion certificate, expected <= 1/3
  double embed_min_band_ratio = 0.0; // banded lower certificate, expected >= 1/30
  double code_max_ratio = 0.0;       // code-to-torus log ratio on sampled pairs
  double extension_beta = 0.0;       // exponent claimed by the extension gauge
};

// Stages: torus embedding; interval system + shift capture; codes of the
// captured atoms; lexicographic code order mapped to [0,1] by cumulative
// count midpoints (an order-based stand-in for the monotone-space step,
// hence substitute_construction); Hilbert image for m >= 2; gauge extension
// to the uncaptured points; empirical modulus of the final map.
struct CubeMapResult {
  double captured_fraction = 0.0;
  int grid_resolution = 0;  // largest q with every 2^-q cell of [0,1]^m hit
  double beta_hat = 0.0;
  StageModuli stage_moduli;
  bool substitute_construction = true;
  bool degenerate = false;  // singleton cloud or nothing captured
  std::vector<std::vector<double>> values;  // final map, one row per point

  Json to_json() const;
};

CubeMapResult map_onto_cube(const PointCloud& cloud,
                            const std::vector<double>& weights, int m,
                            const CubeMapOptions& opt = {});

}  // namespace metrifract
