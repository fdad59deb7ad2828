#include "metrifract/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metrifract {

ScaleStage color_stage(const PointCloud& cloud, int n) {
  ScaleStage stage;
  stage.n = n;
  stage.eps = std::ldexp(1.0, -n);
  stage.net = maximal_separated(cloud, stage.eps);
  stage.palette = local_ball_bound(cloud, stage.net, 8 * stage.eps);
  stage.color.assign(stage.net.members.size(), 0);
  // greedy: least color unused among already-colored members within 8*eps.
  // each conflict neighborhood sits inside one 8*eps ball, so the palette
  // bound is never exceeded.
  for (size_t a = 0; a < stage.net.members.size(); ++a) {
    std::vector<char> used(stage.palette, 0);
    for (size_t b = 0; b < a; ++b)
      if (cloud.dist(stage.net.members[a], stage.net.members[b]) <= 8 * stage.eps)
        used[stage.color[b]] = 1;
    int c = 0;
    while (c < static_cast<int>(stage.palette) && used[c]) ++c;
    if (c >= static_cast<int>(stage.palette))
      throw validation_error("coloring exceeded its palette");  // cannot happen
    stage.color[a] = c;
  }
  return stage;
}

double phi_coordinate(const PointCloud& cloud, size_t x, const ScaleStage& stage, int j) {
  double cap = 1.5 * stage.eps;
  double best = cap;
  for (size_t a = 0; a < stage.net.members.size(); ++a)
    if (stage.color[a] == j) best = std::min(best, cloud.dist(x, stage.net.members[a]));
  return best;
}

TorusEmbedding embed_cloud(const PointCloud& cloud, int n_min, int n_max) {
  if (n_min > n_max) throw validation_error("empty scale range");
  if (cloud.size() == 0) throw validation_error("empty cloud");
  double diam = cloud.diameter();
  if (diam > 1.0)
    throw validation_error("cloud diameter " + std::to_string(diam) +
                           " exceeds 1; normalize first");
  TorusEmbedding emb;
  emb.n_min = n_min;
  std::vector<long long> sizes;
  for (int n = n_min; n <= n_max; ++n) {
    emb.stages.push_back(color_stage(cloud, n));
    sizes.push_back(static_cast<long long>(emb.stages.back().palette));
  }
  emb.schedule = BlockSchedule::from_sizes(sizes, "embedded");

  emb.phi.assign(cloud.size(), {});
  emb.images.assign(cloud.size(), {});
  for (size_t x = 0; x < cloud.size(); ++x) {
    auto& row = emb.phi[x];
    auto& img = emb.images[x].coords;
    row.reserve(static_cast<size_t>(emb.schedule.total()));
    img.reserve(static_cast<size_t>(emb.schedule.total()));
    for (const auto& stage : emb.stages) {
      for (int j = 0; j < static_cast<int>(stage.palette); ++j) {
        double phi = phi_coordinate(cloud, x, stage, j);
        row.push_back(phi);
        // phi <= (3/2)*2^-n, so this lands in [0, 1/2]
        img.push_back(std::ldexp(phi, stage.n) / 3.0);
      }
    }
  }
  return emb;
}

DistortionReport distortion_report(const PointCloud& cloud, const TorusEmbedding& emb,
                                   int threads) {
  DistortionReport report;
  size_t n = cloud.size();
  if (emb.phi.size() != n) throw validation_error("embedding does not match cloud");
  size_t total_pairs = n * (n - 1) / 2;

  // block layout of the phi table
  struct Block {
    size_t begin;
    size_t size;
    int level;
    double eps;
  };
  std::vector<Block> blocks;
  {
    size_t at = 0;
    for (const auto& stage : emb.stages) {
      blocks.push_back({at, stage.palette, stage.n, stage.eps});
      at += stage.palette;
    }
  }

  auto chunks = chunk_ranges(total_pairs, threads);
  std::vector<DistortionReport> parts(chunks.size());
  struct Extremes {
    DistortionPair max_pair;
    DistortionPair min_band_pair;
    bool has_max = false, has_band = false;
  };
  std::vector<Extremes> extremes(chunks.size());

  auto pair_at = [n](size_t t) {
    // row-major upper triangle unrank
    size_t i = 0, remaining = t, row = n - 1;
    while (remaining >= row) {
      remaining -= row;
      ++i;
      --row;
    }
    return std::pair<size_t, size_t>(i, i + 1 + remaining);
  };

  parallel_for(total_pairs, threads, [&](size_t c, size_t begin, size_t end) {
    DistortionReport& part = parts[c];
    part.min_band_ratio = std::numeric_limits<double>::infinity();
    auto [i0, j0] = begin < total_pairs ? pair_at(begin) : std::pair<size_t, size_t>(0, 0);
    size_t i = i0, j = j0;
    for (size_t t = begin; t < end; ++t) {
      const double d = cloud.dist(i, j);
      if (d == 0.0) {
        ++part.skipped_pairs;
      } else {
        ++part.pairs;
        const auto& px = emb.phi[i];
        const auto& py = emb.phi[j];
        double m = 0.0;
        bool upper_ok = true;
        for (size_t k = 0; k < px.size(); ++k) {
          double diff = std::fabs(px[k] - py[k]);
          if (diff > d) upper_ok = false;
          m = std::max(m, diff);
        }
        part.lipschitz_ok = part.lipschitz_ok && upper_ok;
        double dg = m / 3.0;
        double ratio = dg / d;
        DistortionPair rec{i, j, d, dg, ratio, false, -1, -1};
        // the bands ((5/2)*2^-n, 5*2^-n] tile; membership is exact arithmetic
        for (const auto& blk : blocks) {
          if (d > 2.5 * blk.eps && d <= 5.0 * blk.eps) {
            rec.banded = true;
            rec.band_n = blk.level;
            double need = d / 10.0;
            for (size_t k = blk.begin; k < blk.begin + blk.size; ++k) {
              if (std::fabs(px[k] - py[k]) >= need) {
                rec.witness_color = static_cast<int>(k - blk.begin);
                break;
              }
            }
            break;
          }
        }
        if (rec.banded) {
          ++part.banded_pairs;
          if (rec.witness_color < 0) part.band_ok = false;
          if (ratio < part.min_band_ratio || !extremes[c].has_band) {
            part.min_band_ratio = std::min(part.min_band_ratio, ratio);
            extremes[c].min_band_pair = rec;
            extremes[c].has_band = true;
          }
        } else {
          ++part.unbanded_pairs;
        }
        if (ratio > part.max_ratio || !extremes[c].has_max) {
          part.max_ratio = std::max(part.max_ratio, ratio);
          extremes[c].max_pair = rec;
          extremes[c].has_max = true;
        }
        // violations always surface in the report
        if ((!upper_ok || (rec.banded && rec.witness_color < 0)) &&
            part.worst_pairs.size() < 16)
          part.worst_pairs.push_back(rec);
      }
      ++j;
      if (j >= n) {
        ++i;
        j = i + 1;
      }
    }
  });

  report.min_band_ratio = std::numeric_limits<double>::infinity();
  const Extremes* best_max = nullptr;
  const Extremes* best_band = nullptr;
  for (size_t c = 0; c < parts.size(); ++c) {
    const auto& part = parts[c];
    report.lipschitz_ok = report.lipschitz_ok && part.lipschitz_ok;
    report.band_ok = report.band_ok && part.band_ok;
    report.pairs += part.pairs;
    report.banded_pairs += part.banded_pairs;
    report.unbanded_pairs += part.unbanded_pairs;
    report.skipped_pairs += part.skipped_pairs;
    if (extremes[c].has_max && (!best_max || part.max_ratio > report.max_ratio)) {
      report.max_ratio = part.max_ratio;
      best_max = &extremes[c];
    }
    if (extremes[c].has_band && (!best_band || part.min_band_ratio < report.min_band_ratio)) {
      report.min_band_ratio = part.min_band_ratio;
      best_band = &extremes[c];
    }
    for (const auto& rec : part.worst_pairs)
      if (report.worst_pairs.size() < 16) report.worst_pairs.push_back(rec);
  }
  if (best_max) report.worst_pairs.push_back(best_max->max_pair);
  if (best_band) report.worst_pairs.push_back(best_band->min_band_pair);
  if (report.banded_pairs == 0) report.min_band_ratio = 0.0;
  return report;
}

}  // namespace metrifract
