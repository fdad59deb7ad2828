#include "metrifract/selfsimilar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "metrifract/rational.hpp"
#include "metrifract/report.hpp"

namespace metrifract {

using json = nlohmann::json;

// ==== similarities ====

Similarity Similarity::axis(double ratio, std::vector<int> perm,
                            std::vector<double> translate) {
  if (!(std::isfinite(ratio) && ratio > 0.0 && ratio < 1.0))
    throw validation_error("similarity ratio must lie in (0,1)");
  const size_t d = translate.size();
  if (d == 0) throw validation_error("similarity needs at least one dimension");
  if (perm.size() != d) throw validation_error("perm/translate dimension mismatch");
  std::vector<char> seen(d, 0);
  for (int p : perm) {
    int j = p > 0 ? p - 1 : -p - 1;
    if (p == 0 || j < 0 || static_cast<size_t>(j) >= d || seen[static_cast<size_t>(j)])
      throw validation_error("perm must be a signed permutation of 1..dim");
    seen[static_cast<size_t>(j)] = 1;
  }
  for (double t : translate)
    if (!std::isfinite(t)) throw validation_error("translation must be finite");
  Similarity f;
  f.ratio_ = ratio;
  f.axis_ = true;
  f.perm_ = std::move(perm);
  f.translate_ = std::move(translate);
  return f;
}

Similarity Similarity::general(double ratio, std::vector<std::vector<double>> matrix,
                               std::vector<double> translate) {
  if (!(std::isfinite(ratio) && ratio > 0.0 && ratio < 1.0))
    throw validation_error("similarity ratio must lie in (0,1)");
  const size_t d = translate.size();
  if (d == 0) throw validation_error("similarity needs at least one dimension");
  if (matrix.size() != d) throw validation_error("matrix/translate dimension mismatch");
  for (const auto& row : matrix) {
    if (row.size() != d) throw validation_error("matrix must be square");
    for (double v : row)
      if (!std::isfinite(v)) throw validation_error("matrix entries must be finite");
  }
  for (size_t i = 0; i < d; ++i)
    for (size_t j = i; j < d; ++j) {
      double dot = 0.0;
      for (size_t k = 0; k < d; ++k) dot += matrix[k][i] * matrix[k][j];
      double want = i == j ? 1.0 : 0.0;
      if (std::fabs(dot - want) > 1e-9)
        throw validation_error("matrix columns must be orthonormal");
    }
  for (double t : translate)
    if (!std::isfinite(t)) throw validation_error("translation must be finite");
  Similarity f;
  f.ratio_ = ratio;
  f.axis_ = false;
  f.matrix_ = std::move(matrix);
  f.translate_ = std::move(translate);
  return f;
}

void Similarity::apply(const double* in, double* out) const {
  const size_t d = dim();
  if (axis_) {
    for (size_t i = 0; i < d; ++i) {
      int p = perm_[i];
      size_t j = static_cast<size_t>(p > 0 ? p - 1 : -p - 1);
      double v = p > 0 ? in[j] : -in[j];
      out[i] = ratio_ * v + translate_[i];
    }
    return;
  }
  for (size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < d; ++j) s += matrix_[i][j] * in[j];
    out[i] = ratio_ * s + translate_[i];
  }
}

std::vector<double> Similarity::operator()(const std::vector<double>& x) const {
  if (x.size() != dim()) throw validation_error("point dimension mismatch");
  std::vector<double> out(dim());
  apply(x.data(), out.data());
  return out;
}

bool IFS::axis_mode() const {
  for (const auto& f : maps)
    if (!f.axis_mode()) return false;
  return true;
}

void IFS::validate() const {
  if (maps.size() < 2) throw validation_error("IFS needs at least two maps");
  const size_t d = maps[0].dim();
  for (const auto& f : maps)
    if (f.dim() != d) throw validation_error("IFS maps disagree on dimension");
  if (open_set) {
    if (open_set->lo.size() != d || open_set->hi.size() != d)
      throw validation_error("open set dimension mismatch");
    for (size_t i = 0; i < d; ++i)
      if (!(std::isfinite(open_set->lo[i]) && std::isfinite(open_set->hi[i]) &&
            open_set->lo[i] < open_set->hi[i]))
        throw validation_error("open set box must be nonempty");
  }
}

IFS load_ifs(const std::string& path) {
  std::string text = read_text_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error("bad IFS JSON: " + std::string(e.what()));
  }
  try {
    const int dim = doc.at("dim").get<int>();
    if (dim < 1) throw validation_error("IFS dimension must be positive");
    IFS ifs;
    for (const auto& m : doc.at("maps")) {
      const double ratio = m.at("ratio").get<double>();
      auto translate = m.at("translate").get<std::vector<double>>();
      if (translate.size() != static_cast<size_t>(dim))
        throw validation_error("translate dimension mismatch");
      if (m.contains("matrix")) {
        auto matrix = m.at("matrix").get<std::vector<std::vector<double>>>();
        ifs.maps.push_back(Similarity::general(ratio, std::move(matrix),
                                               std::move(translate)));
      } else {
        auto perm = m.at("perm").get<std::vector<int>>();
        ifs.maps.push_back(
            Similarity::axis(ratio, std::move(perm), std::move(translate)));
      }
    }
    if (doc.contains("open_set")) {
      Box b;
      b.lo = doc.at("open_set").at("lo").get<std::vector<double>>();
      b.hi = doc.at("open_set").at("hi").get<std::vector<double>>();
      ifs.open_set = std::move(b);
    }
    ifs.validate();
    return ifs;
  } catch (const json::exception& e) {
    throw io_error("bad IFS JSON: " + std::string(e.what()));
  }
}

// ==== similarity dimension ====

double moran_dimension(const IFS& ifs) {
  ifs.validate();
  auto residual = [&](double s) {
    double sum = 0.0;
    for (const auto& f : ifs.maps) sum += std::pow(f.ratio(), s);
    return sum - 1.0;
  };
  double lo = 0.0;
  double hi = std::max(2.0, 2.0 * static_cast<double>(ifs.dim()));
  while (residual(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e9) throw std::logic_error("similarity dimension bracket ran away");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    double mid = 0.5 * (lo + hi);
    if (residual(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ==== attractor sampling ====

std::vector<double> AttractorSample::point(size_t i) const {
  return std::vector<double>(coords.begin() + static_cast<long>(i * dim),
                             coords.begin() + static_cast<long>((i + 1) * dim));
}

std::string AttractorSample::label(size_t i) const {
  if (depth == 0) return "";
  if (map_count <= 36) {
    std::string s(static_cast<size_t>(depth), '0');
    size_t v = i;
    for (int p = depth - 1; p >= 0; --p) {
      size_t digit = v % map_count;
      v /= map_count;
      s[static_cast<size_t>(p)] =
          digit < 10 ? static_cast<char>('0' + digit)
                     : static_cast<char>('a' + digit - 10);
    }
    return s;
  }
  std::string s;
  std::vector<size_t> digits(static_cast<size_t>(depth));
  size_t v = i;
  for (int p = depth - 1; p >= 0; --p) {
    digits[static_cast<size_t>(p)] = v % map_count;
    v /= map_count;
  }
  for (size_t p = 0; p < digits.size(); ++p) {
    if (p) s += ",";
    s += std::to_string(digits[p]);
  }
  return s;
}

PointCloud AttractorSample::cloud() const {
  std::vector<std::vector<double>> pts;
  pts.reserve(size());
  for (size_t i = 0; i < size(); ++i) pts.push_back(point(i));
  return PointCloud::from_points(std::move(pts));
}

namespace {

// fixed point of f: solve (I - ratio*O) x = translate by partial pivoting
std::vector<double> fixed_point(const Similarity& f) {
  const size_t d = f.dim();
  std::vector<std::vector<double>> A(d, std::vector<double>(d, 0.0));
  for (size_t i = 0; i < d; ++i) A[i][i] = 1.0;
  if (f.axis_mode()) {
    for (size_t i = 0; i < d; ++i) {
      int p = f.perm()[i];
      size_t j = static_cast<size_t>(p > 0 ? p - 1 : -p - 1);
      A[i][j] -= f.ratio() * (p > 0 ? 1.0 : -1.0);
    }
  } else {
    for (size_t i = 0; i < d; ++i)
      for (size_t j = 0; j < d; ++j) A[i][j] -= f.ratio() * f.matrix()[i][j];
  }
  std::vector<double> x = f.translate();
  for (size_t col = 0; col < d; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < d; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    std::swap(A[col], A[piv]);
    std::swap(x[col], x[piv]);
    // ratio < 1 keeps I - ratio*O invertible, so the pivot is nonzero
    for (size_t r = col + 1; r < d; ++r) {
      double m = A[r][col] / A[col][col];
      if (m == 0.0) continue;
      for (size_t c = col; c < d; ++c) A[r][c] -= m * A[col][c];
      x[r] -= m * x[col];
    }
  }
  for (size_t col = d; col-- > 0;) {
    for (size_t c = col + 1; c < d; ++c) x[col] -= A[col][c] * x[c];
    x[col] /= A[col][col];
  }
  return x;
}

}  // namespace

AttractorSample attractor_points(const IFS& ifs, int depth, int threads) {
  ifs.validate();
  if (depth < 0) throw validation_error("depth must be nonnegative");
  const size_t m = ifs.maps.size();
  const size_t d = ifs.dim();
  double budget = 1.0;
  for (int p = 0; p < depth; ++p) {
    budget *= static_cast<double>(m);
    if (budget > 1e7) throw validation_error("attractor budget exceeded");
  }

  AttractorSample out;
  out.depth = depth;
  out.dim = d;
  out.map_count = m;
  out.coords = fixed_point(ifs.maps[0]);
  for (int level = 0; level < depth; ++level) {
    const size_t old_count = out.coords.size() / d;
    std::vector<double> next(out.coords.size() * m);
    const std::vector<double>& prev = out.coords;
    parallel_for(m * old_count, threads, [&](size_t, size_t begin, size_t end) {
      for (size_t idx = begin; idx < end; ++idx) {
        const size_t map_i = idx / old_count;
        const size_t q = idx % old_count;
        ifs.maps[map_i].apply(prev.data() + q * d, next.data() + idx * d);
      }
    });
    out.coords = std::move(next);
  }
  return out;
}

// ==== open set condition ====

namespace {

struct RatBox {
  std::vector<Rat> lo, hi;
};

RatBox to_rat(const Box& b) {
  RatBox r;
  for (double v : b.lo) r.lo.emplace_back(v);
  for (double v : b.hi) r.hi.emplace_back(v);
  return r;
}

// exact image box for signed-axis maps; exact bounding box otherwise
RatBox image_box(const Similarity& f, const RatBox& box) {
  const size_t d = f.dim();
  const Rat c(f.ratio());
  RatBox img;
  img.lo.assign(d, Rat(0));
  img.hi.assign(d, Rat(0));
  if (f.axis_mode()) {
    for (size_t i = 0; i < d; ++i) {
      int p = f.perm()[i];
      size_t j = static_cast<size_t>(p > 0 ? p - 1 : -p - 1);
      Rat t(f.translate()[i]);
      if (p > 0) {
        img.lo[i] = c * box.lo[j] + t;
        img.hi[i] = c * box.hi[j] + t;
      } else {
        img.lo[i] = -(c * box.hi[j]) + t;
        img.hi[i] = -(c * box.lo[j]) + t;
      }
    }
    return img;
  }
  for (size_t i = 0; i < d; ++i) {
    Rat lo(f.translate()[i]), hi = lo;
    for (size_t j = 0; j < d; ++j) {
      Rat w = c * Rat(f.matrix()[i][j]);
      if (w >= 0) {
        lo += w * box.lo[j];
        hi += w * box.hi[j];
      } else {
        lo += w * box.hi[j];
        hi += w * box.lo[j];
      }
    }
    img.lo[i] = lo;
    img.hi[i] = hi;
  }
  return img;
}

}  // namespace

OscReport osc_check(const IFS& ifs, const Box& box) {
  ifs.validate();
  const size_t d = ifs.dim();
  if (box.lo.size() != d || box.hi.size() != d)
    throw validation_error("box dimension mismatch");
  for (size_t i = 0; i < d; ++i)
    if (!(std::isfinite(box.lo[i]) && std::isfinite(box.hi[i]) &&
          box.lo[i] < box.hi[i]))
      throw validation_error("box must be nonempty");

  RatBox outer = to_rat(box);
  std::vector<RatBox> images;
  images.reserve(ifs.maps.size());
  for (const auto& f : ifs.maps) images.push_back(image_box(f, outer));

  OscReport rep;
  rep.exact = ifs.axis_mode();
  rep.contained = true;
  for (const auto& img : images)
    for (size_t i = 0; i < d; ++i)
      if (img.lo[i] < outer.lo[i] || img.hi[i] > outer.hi[i]) rep.contained = false;
  rep.disjoint = true;
  for (size_t a = 0; a < images.size(); ++a)
    for (size_t b = a + 1; b < images.size(); ++b) {
      bool separated = false;
      for (size_t i = 0; i < d && !separated; ++i)
        if (images[a].hi[i] <= images[b].lo[i] || images[b].hi[i] <= images[a].lo[i])
          separated = true;
      if (!separated) rep.disjoint = false;
    }
  return rep;
}

// ==== dimension estimators ====

BoxCountSeries box_dimension(const PointCloud& cloud,
                             const std::vector<double>& r_grid, int threads) {
  if (cloud.matrix_mode())
    throw validation_error("box counting needs embedded points");
  if (cloud.size() == 0) throw validation_error("empty cloud");
  std::vector<double> distinct = r_grid;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (r_grid.size() < 2 || distinct.size() < 2)
    throw validation_error("degenerate grid: need two distinct radii");
  for (double r : r_grid)
    if (!(std::isfinite(r) && r > 0.0))
      throw validation_error("degenerate grid: radii must be positive");

  const size_t n = cloud.size();
  const size_t d = cloud.dim();
  BoxCountSeries series;
  series.r = r_grid;
  for (double r : r_grid) {
    std::vector<long long> keys(n * d);
    parallel_for(n, threads, [&](size_t, size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i) {
        const auto& pt = cloud.point(i);
        for (size_t c = 0; c < d; ++c)
          keys[i * d + c] = static_cast<long long>(std::floor(pt[c] / r));
      }
    });
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    auto row_less = [&](size_t a, size_t b) {
      for (size_t c = 0; c < d; ++c) {
        if (keys[a * d + c] != keys[b * d + c]) return keys[a * d + c] < keys[b * d + c];
      }
      return false;
    };
    std::sort(idx.begin(), idx.end(), row_less);
    size_t count = n == 0 ? 0 : 1;
    for (size_t i = 1; i < n; ++i)
      if (row_less(idx[i - 1], idx[i])) ++count;
    series.count.push_back(count);
  }

  double mx = 0.0, my = 0.0;
  const size_t g = r_grid.size();
  std::vector<double> xs(g), ys(g);
  for (size_t i = 0; i < g; ++i) {
    xs[i] = -std::log(r_grid[i]);
    ys[i] = std::log(static_cast<double>(series.count[i]));
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(g);
  my /= static_cast<double>(g);
  double cov = 0.0, var = 0.0;
  for (size_t i = 0; i < g; ++i) {
    cov += (xs[i] - mx) * (ys[i] - my);
    var += (xs[i] - mx) * (xs[i] - mx);
  }
  if (var == 0.0) throw validation_error("degenerate grid: need two distinct radii");
  series.slope = cov / var;
  return series;
}

PremeasureBound hausdorff_premeasure_upper(const PointCloud& cloud, const Gauge& g,
                                           double delta) {
  if (!(std::isfinite(delta) && delta > 0.0))
    throw validation_error("delta must be positive");
  const size_t n = cloud.size();
  PremeasureBound out;
  std::vector<char> covered(n, 0);
  std::vector<size_t> cluster;
  for (size_t anchor = 0; anchor < n; ++anchor) {
    if (covered[anchor]) continue;
    cluster.clear();
    for (size_t j = anchor; j < n; ++j) {
      if (covered[j]) continue;
      if (cloud.dist(anchor, j) <= delta / 2.0) {
        cluster.push_back(j);
        covered[j] = 1;
      }
    }
    double diam = 0.0;
    for (size_t a = 0; a < cluster.size(); ++a)
      for (size_t b = a + 1; b < cluster.size(); ++b)
        diam = std::max(diam, cloud.dist(cluster[a], cluster[b]));
    ++out.clusters;
    out.max_diameter = std::max(out.max_diameter, diam);
    if (diam > 0.0) out.upper_bound += g(diam);
  }
  return out;
}

}  // namespace metrifract
