#pragma once

#include <cstddef>
#include <vector>

#include "metrifract/covering.hpp"
#include "metrifract/geometry.hpp"

namespace metrifract {

// One scale: the 2^-n net, its exact ball bound G(n), and a greedy coloring
// in which members within 8*eps_n never share a color.
struct ScaleStage {
  int n = 0;
  double eps = 0.0;
  SeparatedNet net;
  size_t palette = 0;           // = local ball bound at radius 8*eps
  std::vector<int> color;       // per net member
};

ScaleStage color_stage(const PointCloud& cloud, int n);

// min distance from x to net members of color j, capped at (3/2)*eps_n.
double phi_coordinate(const PointCloud& cloud, size_t x, const ScaleStage& stage, int j);

struct TorusEmbedding {
  BlockSchedule schedule;            // level n block size = palette of stage n
  int n_min = 0;
  std::vector<TorusPoint> images;    // coordinate j of block n holds (2^n/3)*phi_j
  std::vector<ScaleStage> stages;
  // phi[point][coordinate], the pre-scaling values the certificates use
  std::vector<std::vector<double>> phi;
};

// Requires diameter <= 1. Image coordinates all land in [0, 1/2], so the
// weighted circle metric never wraps and block n contributes |dphi_j|/3.
TorusEmbedding embed_cloud(const PointCloud& cloud, int n_min, int n_max);

struct DistortionPair {
  size_t i = 0, j = 0;
  double d = 0.0;        // source distance
  double dg = 0.0;       // image distance, max_k |dphi_k| / 3
  double ratio = 0.0;    // dg / d
  bool banded = false;   // (5/2)*eps_n < d <= 5*eps_n for some stage n
  int band_n = -1;
  int witness_color = -1;  // coordinate k within the band block with |dphi| >= d/10
};

struct DistortionReport {
  bool lipschitz_ok = true;   // every pair, every coordinate: |dphi| <= d
  bool band_ok = true;        // every banded pair has a witness coordinate
  size_t pairs = 0;
  size_t banded_pairs = 0;
  size_t unbanded_pairs = 0;
  size_t skipped_pairs = 0;   // d == 0
  double max_ratio = 0.0;       // expected <= 1/3
  double min_band_ratio = 0.0;  // over banded pairs, expected >= 1/30
  std::vector<DistortionPair> worst_pairs;  // extremes of both ratios
};

// Certificates are evaluated on the phi table: the upper check is
// coordinatewise |dphi| <= d (exact), the banded lower check is
// |dphi| >= d/10 at some coordinate of the band block.
DistortionReport distortion_report(const PointCloud& cloud, const TorusEmbedding& emb,
                                   int threads = 1);

}  // namespace metrifract
