#pragma once

#include <optional>
#include <string>
#include <vector>

#include "metrifract/gauge.hpp"
#include "metrifract/geometry.hpp"

namespace metrifract {

// ==== iterated function systems ====

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

// x -> ratio * O * x + translate with O orthogonal. The default form keeps O
// a signed axis permutation so box images stay boxes; a general orthonormal
// matrix is allowed but demotes OSC checking to bounding boxes.
class Similarity {
 public:
  // perm[i] = +-(j+1): output coordinate i reads source coordinate j, signed
  static Similarity axis(double ratio, std::vector<int> perm,
                         std::vector<double> translate);
  static Similarity general(double ratio, std::vector<std::vector<double>> matrix,
                            std::vector<double> translate);

  size_t dim() const { return translate_.size(); }
  double ratio() const { return ratio_; }
  bool axis_mode() const { return axis_; }
  const std::vector<int>& perm() const { return perm_; }
  const std::vector<std::vector<double>>& matrix() const { return matrix_; }
  const std::vector<double>& translate() const { return translate_; }

  void apply(const double* in, double* out) const;
  std::vector<double> operator()(const std::vector<double>& x) const;

 private:
  Similarity() = default;
  double ratio_ = 0.0;
  bool axis_ = true;
  std::vector<int> perm_;
  std::vector<std::vector<double>> matrix_;
  std::vector<double> translate_;
};

struct IFS {
  std::vector<Similarity> maps;
  std::optional<Box> open_set;

  size_t dim() const { return maps.empty() ? 0 : maps[0].dim(); }
  bool axis_mode() const;
  void validate() const;  // >= 2 maps, ratios in (0,1), consistent dimension
};

// JSON file: {dim, maps: [{ratio, perm|matrix, translate}], open_set: {lo, hi}}
IFS load_ifs(const std::string& path);

// ==== similarity dimension ====

// Unique root of sum_i ratio_i^s = 1 (strictly decreasing in s), bisected to
// below 1e-13 width; the bracket grows past 2*dim when the root demands it.
double moran_dimension(const IFS& ifs);

// ==== attractor sampling ====

// Every word of length `depth` applied to the fixed point of map 0, in
// lexicographic word order, so the label of point i is i written in base
// #maps. Words act leftmost-outermost: point(w) = f_{w0}(point(w1...)).
struct AttractorSample {
  int depth = 0;
  size_t dim = 0;
  size_t map_count = 0;
  std::vector<double> coords;  // row-major, map_count^depth points

  size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::vector<double> point(size_t i) const;
  std::string label(size_t i) const;
  PointCloud cloud() const;
};

AttractorSample attractor_points(const IFS& ifs, int depth, int threads = 1);

// ==== open set condition ====

// exact == true means the answers are decisive (signed-axis maps, exact
// rational interval arithmetic); otherwise false answers only mean
// "not provable from bounding boxes".
struct OscReport {
  bool contained = false;
  bool disjoint = false;
  bool exact = false;
};

OscReport osc_check(const IFS& ifs, const Box& box);

// ==== dimension estimators ====

struct BoxCountSeries {
  std::vector<double> r;
  std::vector<size_t> count;
  double slope = 0.0;  // least squares of log count vs log(1/r)
};

BoxCountSeries box_dimension(const PointCloud& cloud, const std::vector<double>& r_grid,
                             int threads = 1);

// Greedy delta-cover: repeatedly take the lowest-index uncovered point,
// absorb everything within delta/2, and charge g(cluster diameter);
// singletons charge nothing. An upper bound on the delta-premeasure of the
// sample, never a measure.
struct PremeasureBound {
  double upper_bound = 0.0;
  size_t clusters = 0;
  double max_diameter = 0.0;
};

PremeasureBound hausdorff_premeasure_upper(const PointCloud& cloud, const Gauge& g,
                                           double delta);

}  // namespace metrifract
