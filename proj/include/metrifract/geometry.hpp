#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "metrifract/util.hpp"

namespace metrifract {

// ==== finite metric spaces ====

// Either embedded points with Euclidean distance or an explicit matrix.
class PointCloud {
 public:
  static PointCloud from_points(std::vector<std::vector<double>> pts);
  // Square, symmetric, nonnegative, zero diagonal.
  static PointCloud from_matrix(std::vector<std::vector<double>> rows);
  static PointCloud load_points(const std::string& path);
  static PointCloud load_matrix(const std::string& path);

  size_t size() const { return n_; }
  size_t dim() const { return dim_; }
  bool matrix_mode() const { return matrix_mode_; }
  const std::vector<double>& point(size_t i) const { return points_[i]; }
  const std::vector<std::vector<double>>& points() const { return points_; }

  double dist(size_t i, size_t j) const {
    if (matrix_mode_) return matrix_[i * n_ + j];
    if (i == j) return 0.0;
    double s = 0.0;
    const auto& a = points_[i];
    const auto& b = points_[j];
    for (size_t c = 0; c < dim_; ++c) {
      double d = a[c] - b[c];
      s += d * d;
    }
    return std::sqrt(s);
  }

  double diameter() const;

  // Matrix-mode copy with entries divided by the diameter; the realizing
  // pair lands on exactly 1.0.
  PointCloud normalized() const;

 private:
  size_t n_ = 0;
  size_t dim_ = 0;
  bool matrix_mode_ = false;
  std::vector<std::vector<double>> points_;
  std::vector<double> matrix_;
};

// ==== coordinate block schedules ====

// Levels n = 0..n_max with block sizes G(n); coordinate k in block n carries
// weight 2^-n. Grammar: const:<g> | poly:<c>,<d> | list:<g0>,<g1>,...
// (poly means G(n) = max(1, ceil(c*(n+1)^d)); a list's last entry repeats).
class BlockSchedule {
 public:
  static BlockSchedule parse(const std::string& spec, int n_max);
  static BlockSchedule from_sizes(std::vector<long long> sizes, std::string label);

  const std::string& spec() const { return spec_; }
  int levels() const { return static_cast<int>(sizes_.size()); }
  int n_max() const { return levels() - 1; }
  long long size_of(int n) const { return sizes_[n]; }
  const std::vector<long long>& sizes() const { return sizes_; }
  long long total() const { return total_; }
  int level_of(long long k) const { return level_of_[k]; }
  long long block_start(int n) const { return starts_[n]; }
  double weight(int n) const { return std::ldexp(1.0, -n); }

 private:
  std::string spec_;
  std::vector<long long> sizes_;
  std::vector<long long> starts_;
  std::vector<int> level_of_;
  long long total_ = 0;
};

struct TorusPoint {
  std::vector<double> coords;  // each in [0,1)
};

struct CodePoint {
  std::vector<std::string> codes;  // binary strings, one per coordinate, equal depth
};

// ==== metrics ====

double circle_dist(double x, double y);
double torus_dist(const TorusPoint& a, const TorusPoint& b, const BlockSchedule& sched);
double code_dist(const CodePoint& a, const CodePoint& b, const BlockSchedule& sched);

enum class MetricLaw { triangle, ultra };

struct MetricCheck {
  bool ok = true;
  bool sampled = false;
  std::array<size_t, 3> worst_triple{0, 0, 0};
  double worst_slack = 0.0;  // positive = violation amount
  size_t triples_checked = 0;
};

MetricCheck validate_metric(const PointCloud& cloud, MetricLaw law);

// ==== ultrametric ball trees ====

struct UltraTree {
  struct Node {
    double diameter = 0.0;
    int leaf = -1;  // >= 0 for leaves
    int min_index = 0;
    std::vector<int> children;
  };
  std::vector<Node> nodes;
  int root = -1;
};

// Rejects non-ultrametric input (worst triple named in the message).
UltraTree ultrametric_to_tree(const PointCloud& cloud);

// Leaf pairwise distances reproduced from LCA diameters, row-major n*n.
std::vector<double> tree_distances(const UltraTree& tree, size_t n);

}  // namespace metrifract
