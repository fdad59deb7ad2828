#pragma once

#include <cstddef>
#include <vector>

#include "metrifract/geometry.hpp"

namespace metrifract {

struct SeparatedNet {
  double eps = 0.0;
  std::vector<size_t> members;  // indices into the parent cloud, scan order
};

// Scan in index order, admit iff distance to every admitted point exceeds eps.
// Pairwise > eps and maximal by construction.
SeparatedNet maximal_separated(const PointCloud& cloud, double eps);

// Greedy upper bound on the covering number: repeatedly take the lowest
// uncovered index as a center and remove its closed r-ball.
size_t greedy_cover_count(const PointCloud& cloud, double r);

// Exact max over cloud points of |net members within closed `radius`|.
size_t local_ball_bound(const PointCloud& cloud, const SeparatedNet& net, double radius);

struct ProfileRow {
  int n = 0;
  double eps = 0.0;
  size_t G = 0;            // local ball bound at radius 8*eps over the eps net
  size_t qhat8 = 0, qhat4 = 0, qhat2 = 0, qhat1 = 0;
  bool claim_ok = false;   // G <= qhat8*qhat4*qhat2*qhat1
};

struct ProfileGridPoint {
  double r = 0.0;
  size_t qhat = 0;      // monotone envelope: min over grid radii <= r of the raw count
  size_t qhat_raw = 0;  // greedy count at r itself
  bool has_ratio = false;
  double log_ratio = 0.0;  // log(qhat) / log(1/r), only for r < 1
};

struct CoveringProfile {
  std::vector<ProfileRow> rows;
  std::vector<ProfileGridPoint> grid;  // radii descending
  double max_log_ratio = 0.0;          // over grid points with r < 1
  bool claim_all_ok = true;
};

// Per n in [n_min, n_max]: eps_n = 2^-n, G(n), greedy counts at
// {8,4,2,1}*eps_n, and the product claim. The grid series carries the
// monotone covering-count envelope over all radii used.
CoveringProfile covering_profile(const PointCloud& cloud, int n_min, int n_max);

}  // namespace metrifract
