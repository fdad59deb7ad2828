#include "metrifract/covering.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace metrifract {

SeparatedNet maximal_separated(const PointCloud& cloud, double eps) {
  if (!(eps > 0)) throw validation_error("separation scale must be positive");
  SeparatedNet net;
  net.eps = eps;
  for (size_t i = 0; i < cloud.size(); ++i) {
    bool clear = true;
    for (size_t m : net.members)
      if (cloud.dist(i, m) <= eps) {
        clear = false;
        break;
      }
    if (clear) net.members.push_back(i);
  }
  return net;
}

size_t greedy_cover_count(const PointCloud& cloud, double r) {
  if (!(r > 0)) throw validation_error("covering radius must be positive");
  std::vector<char> covered(cloud.size(), 0);
  size_t count = 0;
  for (size_t i = 0; i < cloud.size(); ++i) {
    if (covered[i]) continue;
    ++count;
    for (size_t j = i; j < cloud.size(); ++j)
      if (!covered[j] && cloud.dist(i, j) <= r) covered[j] = 1;
  }
  return count;
}

size_t local_ball_bound(const PointCloud& cloud, const SeparatedNet& net, double radius) {
  size_t best = 0;
  for (size_t x = 0; x < cloud.size(); ++x) {
    size_t count = 0;
    for (size_t m : net.members)
      if (cloud.dist(x, m) <= radius) ++count;
    best = std::max(best, count);
  }
  return best;
}

CoveringProfile covering_profile(const PointCloud& cloud, int n_min, int n_max) {
  if (n_min > n_max) throw validation_error("empty level range");
  if (cloud.size() == 0) throw validation_error("empty cloud");
  CoveringProfile profile;

  // raw greedy counts per radius, deduplicated across levels
  std::map<double, size_t> raw;
  auto raw_at = [&](double r) {
    auto it = raw.find(r);
    if (it != raw.end()) return it->second;
    size_t q = greedy_cover_count(cloud, r);
    raw.emplace(r, q);
    return q;
  };

  for (int n = n_min; n <= n_max; ++n) {
    ProfileRow row;
    row.n = n;
    row.eps = std::ldexp(1.0, -n);
    auto net = maximal_separated(cloud, row.eps);
    row.G = local_ball_bound(cloud, net, 8 * row.eps);
    row.qhat8 = raw_at(8 * row.eps);
    row.qhat4 = raw_at(4 * row.eps);
    row.qhat2 = raw_at(2 * row.eps);
    row.qhat1 = raw_at(row.eps);
    // the product can overflow only far beyond any usable cloud size; the
    // counts are <= N so compare in long double headroom
    long double product = static_cast<long double>(row.qhat8) * row.qhat4;
    product *= row.qhat2;
    product *= row.qhat1;
    row.claim_ok = static_cast<long double>(row.G) <= product;
    profile.claim_all_ok = profile.claim_all_ok && row.claim_ok;
    profile.rows.push_back(row);
  }

  // monotone envelope over the collected radii: a cover at a smaller radius
  // is a cover at r, so min over radii <= r is still an upper bound and is
  // nonincreasing in r (raw greedy counts alone need not be)
  std::vector<std::pair<double, size_t>> by_radius(raw.begin(), raw.end());  // ascending r
  size_t running = 0;
  bool first = true;
  std::vector<ProfileGridPoint> grid;
  for (const auto& [r, q] : by_radius) {
    running = first ? q : std::min(running, q);
    first = false;
    ProfileGridPoint g;
    g.r = r;
    g.qhat = running;
    g.qhat_raw = q;
    if (r < 1.0) {
      g.has_ratio = true;
      g.log_ratio = std::log(static_cast<double>(g.qhat)) / std::log(1.0 / r);
    }
    grid.push_back(g);
  }
  std::reverse(grid.begin(), grid.end());  // descending radii for the report
  profile.grid = std::move(grid);
  profile.max_log_ratio = 0.0;
  for (const auto& g : profile.grid)
    if (g.has_ratio) profile.max_log_ratio = std::max(profile.max_log_ratio, g.log_ratio);
  return profile;
}

}  // namespace metrifract
