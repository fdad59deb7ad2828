#include "metrifract/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "metrifract/report.hpp"

namespace metrifract {

// ==== PointCloud ====

PointCloud PointCloud::from_points(std::vector<std::vector<double>> pts) {
  PointCloud c;
  c.n_ = pts.size();
  c.dim_ = pts.empty() ? 0 : pts[0].size();
  if (!pts.empty() && c.dim_ == 0) throw validation_error("points need dimension >= 1");
  for (const auto& p : pts) {
    if (p.size() != c.dim_) throw validation_error("inconsistent point dimensions");
    for (double v : p)
      if (!std::isfinite(v)) throw validation_error("non-finite coordinate");
  }
  c.points_ = std::move(pts);
  return c;
}

PointCloud PointCloud::from_matrix(std::vector<std::vector<double>> rows) {
  PointCloud c;
  c.matrix_mode_ = true;
  c.n_ = rows.size();
  c.dim_ = 1;
  c.matrix_.assign(c.n_ * c.n_, 0.0);
  for (size_t i = 0; i < c.n_; ++i) {
    if (rows[i].size() != c.n_) throw validation_error("distance matrix must be square");
    for (size_t j = 0; j < c.n_; ++j) {
      double v = rows[i][j];
      if (!std::isfinite(v) || v < 0) throw validation_error("matrix entries must be finite and nonnegative");
      c.matrix_[i * c.n_ + j] = v;
    }
  }
  for (size_t i = 0; i < c.n_; ++i) {
    if (c.matrix_[i * c.n_ + i] != 0.0) throw validation_error("matrix diagonal must be zero");
    for (size_t j = 0; j < i; ++j)
      if (c.matrix_[i * c.n_ + j] != c.matrix_[j * c.n_ + i])
        throw validation_error("matrix must be symmetric");
  }
  // point labels so size/dim stay meaningful
  c.points_.assign(c.n_, std::vector<double>{0.0});
  return c;
}

PointCloud PointCloud::load_points(const std::string& path) {
  auto rows = read_csv(path);
  std::vector<std::vector<double>> pts;
  pts.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> p;
    p.reserve(row.size());
    for (const auto& cell : row) p.push_back(parse_double(cell));
    pts.push_back(std::move(p));
  }
  try {
    return from_points(std::move(pts));
  } catch (const validation_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

PointCloud PointCloud::load_matrix(const std::string& path) {
  auto rows = read_csv(path);
  std::vector<std::vector<double>> m;
  m.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& cell : row) r.push_back(parse_double(cell));
    m.push_back(std::move(r));
  }
  try {
    return from_matrix(std::move(m));
  } catch (const validation_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

double PointCloud::diameter() const {
  double best = 0.0;
  for (size_t i = 0; i < n_; ++i)
    for (size_t j = i + 1; j < n_; ++j) best = std::max(best, dist(i, j));
  return best;
}

PointCloud PointCloud::normalized() const {
  double d = diameter();
  if (d <= 0.0) throw validation_error("cannot normalize: diameter is zero");
  PointCloud c;
  c.matrix_mode_ = true;
  c.n_ = n_;
  c.dim_ = 1;
  c.matrix_.assign(n_ * n_, 0.0);
  for (size_t i = 0; i < n_; ++i)
    for (size_t j = 0; j < n_; ++j) c.matrix_[i * n_ + j] = i == j ? 0.0 : dist(i, j) / d;
  c.points_.assign(n_, std::vector<double>{0.0});
  return c;
}

// ==== BlockSchedule ====

BlockSchedule BlockSchedule::from_sizes(std::vector<long long> sizes, std::string label) {
  if (sizes.empty()) throw validation_error("schedule needs at least one level");
  BlockSchedule s;
  s.spec_ = std::move(label);
  s.sizes_ = std::move(sizes);
  bool any = false;
  for (long long g : s.sizes_) {
    if (g < 0) throw validation_error("block sizes must be nonnegative");
    any = any || g > 0;
  }
  if (!any) throw validation_error("schedule has no coordinates");
  s.starts_.resize(s.sizes_.size());
  for (size_t n = 0; n < s.sizes_.size(); ++n) {
    s.starts_[n] = s.total_;
    s.total_ += s.sizes_[n];
    for (long long i = 0; i < s.sizes_[n]; ++i) s.level_of_.push_back(static_cast<int>(n));
  }
  return s;
}

BlockSchedule BlockSchedule::parse(const std::string& spec, int n_max) {
  if (n_max < 0) throw validation_error("n_max must be nonnegative");
  size_t colon = spec.find(':');
  if (colon == std::string::npos) throw io_error("bad G spec: '" + spec + "'");
  std::string family = spec.substr(0, colon);
  std::string args = spec.substr(colon + 1);
  std::vector<long long> sizes;
  if (family == "const") {
    long long g = parse_int(args);
    if (g < 1) throw validation_error("const schedule needs g >= 1");
    sizes.assign(static_cast<size_t>(n_max) + 1, g);
  } else if (family == "poly") {
    auto parts = split(args, ',');
    if (parts.size() != 2) throw io_error("bad G spec: '" + spec + "'");
    double c = parse_double(parts[0]);
    double d = parse_double(parts[1]);
    if (!(c > 0) || d < 0) throw validation_error("poly schedule needs c > 0, d >= 0");
    for (int n = 0; n <= n_max; ++n) {
      double v = std::ceil(c * std::pow(static_cast<double>(n + 1), d));
      sizes.push_back(std::max(1LL, static_cast<long long>(v)));
    }
  } else if (family == "list") {
    auto parts = split(args, ',');
    if (parts.empty()) throw io_error("bad G spec: '" + spec + "'");
    std::vector<long long> listed;
    for (const auto& p : parts) listed.push_back(parse_int(p));
    for (int n = 0; n <= n_max; ++n) {
      size_t i = std::min(static_cast<size_t>(n), listed.size() - 1);
      sizes.push_back(listed[i]);
    }
  } else {
    throw io_error("bad G spec: '" + spec + "'");
  }
  return from_sizes(std::move(sizes), spec);
}

// ==== metrics ====

double circle_dist(double x, double y) {
  if (!(x >= 0.0 && x < 1.0) || !(y >= 0.0 && y < 1.0))
    throw validation_error("circle coordinate outside [0,1)");
  double d = std::fabs(x - y);
  return std::min(d, 1.0 - d);
}

double torus_dist(const TorusPoint& a, const TorusPoint& b, const BlockSchedule& sched) {
  if (a.coords.size() != static_cast<size_t>(sched.total()) ||
      b.coords.size() != static_cast<size_t>(sched.total()))
    throw validation_error("torus point size does not match schedule");
  double best = 0.0;
  for (size_t k = 0; k < a.coords.size(); ++k) {
    double v = sched.weight(sched.level_of(static_cast<long long>(k))) *
               circle_dist(a.coords[k], b.coords[k]);
    best = std::max(best, v);
  }
  return best;
}

double code_dist(const CodePoint& a, const CodePoint& b, const BlockSchedule& sched) {
  if (a.codes.size() != static_cast<size_t>(sched.total()) ||
      b.codes.size() != static_cast<size_t>(sched.total()))
    throw validation_error("code point size does not match schedule");
  double best = 0.0;
  for (size_t k = 0; k < a.codes.size(); ++k) {
    const std::string& x = a.codes[k];
    const std::string& y = b.codes[k];
    if (x.size() != y.size()) throw validation_error("code depth mismatch");
    if (x == y) continue;  // agree through the whole horizon
    size_t lcp = 0;
    while (x[lcp] == y[lcp]) ++lcp;
    double v = sched.weight(sched.level_of(static_cast<long long>(k))) *
               std::ldexp(1.0, -static_cast<int>(lcp));
    best = std::max(best, v);
  }
  return best;
}

// ==== metric validation ====

namespace {

// slack > 0 means (i,k) through j violates the law
double law_slack(const PointCloud& c, MetricLaw law, size_t i, size_t j, size_t k) {
  double dij = c.dist(i, j), djk = c.dist(j, k), dik = c.dist(i, k);
  double bound = law == MetricLaw::triangle ? dij + djk : std::max(dij, djk);
  return dik - bound;
}

}  // namespace

MetricCheck validate_metric(const PointCloud& cloud, MetricLaw law) {
  MetricCheck r;
  size_t n = cloud.size();
  if (n < 3) {
    r.triples_checked = 0;
    return r;
  }
  r.worst_slack = -std::numeric_limits<double>::infinity();
  auto consider = [&](size_t i, size_t j, size_t k) {
    // j is the middle point of the law
    double s = law_slack(cloud, law, i, j, k);
    ++r.triples_checked;
    if (s > r.worst_slack) {
      r.worst_slack = s;
      r.worst_triple = {i, j, k};
    }
  };
  const size_t exhaustive_limit = 300;
  if (n <= exhaustive_limit) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j)
        for (size_t k = j + 1; k < n; ++k) {
          consider(i, j, k);
          consider(i, k, j);
          consider(j, i, k);
        }
  } else {
    r.sampled = true;
    Rng rng(0x5eed);
    for (size_t t = 0; t < 100000; ++t) {
      size_t i = rng.index(n), j = rng.index(n), k = rng.index(n);
      if (i == j || j == k || i == k) continue;
      consider(i, j, k);
    }
  }
  r.ok = r.worst_slack <= 0.0;
  return r;
}

// ==== ultrametric trees ====

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

UltraTree ultrametric_to_tree(const PointCloud& cloud) {
  auto check = validate_metric(cloud, MetricLaw::ultra);
  if (!check.ok)
    throw validation_error("not ultrametric: triple (" + std::to_string(check.worst_triple[0]) +
                           "," + std::to_string(check.worst_triple[1]) + "," +
                           std::to_string(check.worst_triple[2]) + ") violates by " +
                           format_double(check.worst_slack));
  size_t n = cloud.size();
  UltraTree tree;
  if (n == 0) return tree;
  for (size_t i = 0; i < n; ++i) {
    UltraTree::Node leaf;
    leaf.leaf = static_cast<int>(i);
    leaf.min_index = static_cast<int>(i);
    tree.nodes.push_back(leaf);
  }
  // cluster root per point, merged level by level
  std::vector<int> cluster(n);
  std::iota(cluster.begin(), cluster.end(), 0);

  std::map<double, std::vector<std::pair<size_t, size_t>>> by_dist;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      double d = cloud.dist(i, j);
      if (d > 0) by_dist[d].emplace_back(i, j);
    }

  for (const auto& [d, pairs] : by_dist) {
    Dsu dsu(tree.nodes.size());
    for (auto [i, j] : pairs) dsu.unite(cluster[i], cluster[j]);
    // gather components of current cluster roots joined at this level
    std::map<int, std::vector<int>> groups;
    for (size_t i = 0; i < n; ++i) groups[dsu.find(cluster[i])].push_back(cluster[i]);
    for (auto& [root, members] : groups) {
      (void)root;
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      if (members.size() < 2) continue;
      std::sort(members.begin(), members.end(), [&](int a, int b) {
        return tree.nodes[a].min_index < tree.nodes[b].min_index;
      });
      UltraTree::Node node;
      node.diameter = d;
      node.children = members;
      node.min_index = tree.nodes[members[0]].min_index;
      int id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(node);
      for (size_t i = 0; i < n; ++i) {
        int c = cluster[i];
        if (std::find(members.begin(), members.end(), c) != members.end()) cluster[i] = id;
      }
    }
  }

  // distinct points at distance 0 are not representable as separate leaves of
  // a diameter tree; they merge into one root otherwise
  int root = cluster[0];
  for (size_t i = 1; i < n; ++i)
    if (cluster[i] != root) throw validation_error("zero-distance pair between distinct points");
  tree.root = root;
  return tree;
}

std::vector<double> tree_distances(const UltraTree& tree, size_t n) {
  std::vector<double> out(n * n, 0.0);
  // leaves below each node, then cross-child pairs take the node diameter
  std::vector<std::vector<int>> leaves(tree.nodes.size());
  for (size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& node = tree.nodes[id];
    if (node.leaf >= 0) {
      leaves[id] = {node.leaf};
      continue;
    }
    for (int c : node.children)
      leaves[id].insert(leaves[id].end(), leaves[c].begin(), leaves[c].end());
    for (size_t a = 0; a < node.children.size(); ++a)
      for (size_t b = a + 1; b < node.children.size(); ++b)
        for (int la : leaves[node.children[a]])
          for (int lb : leaves[node.children[b]]) {
            out[static_cast<size_t>(la) * n + lb] = node.diameter;
            out[static_cast<size_t>(lb) * n + la] = node.diameter;
          }
  }
  return out;
}

}  // namespace metrifract
