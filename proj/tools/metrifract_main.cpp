#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "metrifract/cantor.hpp"
#include "metrifract/covering.hpp"
#include "metrifract/embedding.hpp"
#include "metrifract/gauge.hpp"
#include "metrifract/geometry.hpp"
#include "metrifract/holder.hpp"
#include "metrifract/rational.hpp"
#include "metrifract/report.hpp"
#include "metrifract/selfsimilar.hpp"
#include "metrifract/util.hpp"

using namespace metrifract;

namespace {

// ==== shared plumbing ====

// METRIFRACT_OUT overrides the flag; the directory is created on demand.
std::string resolve_out(const std::string& flag) {
  const char* env = std::getenv("METRIFRACT_OUT");
  std::string dir = (env && *env) ? std::string(env) : flag;
  if (dir.empty()) dir = ".";
  try {
    std::filesystem::create_directories(dir);
  } catch (const std::exception& e) {
    throw io_error("cannot create output dir '" + dir + "': " + e.what());
  }
  return dir;
}

void emit_json(const std::string& dir, const std::string& name, const Json& j) {
  write_text_file(dir + "/" + name, j.dump_pretty() + "\n");
}

PointCloud load_cloud(const std::string& points, const std::string& matrix) {
  if (!points.empty() && !matrix.empty())
    throw io_error("give either --points or --matrix, not both");
  if (!points.empty()) return PointCloud::load_points(points);
  if (!matrix.empty()) return PointCloud::load_matrix(matrix);
  throw io_error("an input file is required: --points or --matrix");
}

double cell_double(const std::string& cell, const std::string& what) {
  try {
    size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw io_error("");
    return v;
  } catch (...) {
    throw io_error("bad " + what + ": '" + cell + "'");
  }
}

size_t cell_index(const std::string& cell, const std::string& what) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(cell, &used);
    if (used != cell.size()) throw io_error("");
    return static_cast<size_t>(v);
  } catch (...) {
    throw io_error("bad " + what + ": '" + cell + "'");
  }
}

Json real_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push(Json::real(x));
  return a;
}

// ==== subcommand argument bundles ====

struct CommonArgs {
  std::string points, matrix, out = ".";
  int threads = 1;
  uint64_t seed = 0;
};

struct ProfileArgs : CommonArgs {
  int nmin = 0, nmax = 6;
};

struct EmbedArgs : CommonArgs {
  int nmin = 0, nmax = 3;
};

struct CantorArgs : CommonArgs {
  std::string epsilon = "1/10", G = "list:1";
  int nmax = 3, depth = 12;
  long long verify = 0;
};

struct ShiftArgs : CantorArgs {
  int grid_depth = 12;
  long long atoms = 0;
};

struct GaugeArgs : CommonArgs {
  std::string gauge = "pow:1";
  double beta = 1.0;
  int decades = 40;
  long long samples = 10000;
  bool permissive = false;
};

struct ExtendArgs : CommonArgs {
  std::string anchors, gauge = "pow:1";
};

struct CurveArgs : CommonArgs {
  int m = 2, order = 6;
  long long samples = 1024;
};

struct IfsArgs : CommonArgs {
  std::string ifs;
  int depth = 5;
};

struct DimensionArgs : CommonArgs {
  std::string ifs, gauge;
  int depth = 5, nmin = 2, nmax = 6;
  double delta = 0.0;
};

struct PipelineArgs : CommonArgs {
  int m = 1, nmin = 0, nmax = 3, depth = 12, grid_depth = 12, order = 8;
  std::string epsilon = "1/10", gauge;
  double beta = 0.9;
  bool normalize = false;
};

// ==== command bodies ====

int run_profile(const ProfileArgs& a) {
  auto cloud = load_cloud(a.points, a.matrix);
  auto prof = covering_profile(cloud, a.nmin, a.nmax);
  std::string dir = resolve_out(a.out);

  std::string csv = "n,eps,G,Qhat8,Qhat4,Qhat2,Qhat1,claim_ok\n";
  for (const auto& r : prof.rows)
    csv += csv_join({std::to_string(r.n), format_double(r.eps), std::to_string(r.G),
                     std::to_string(r.qhat8), std::to_string(r.qhat4),
                     std::to_string(r.qhat2), std::to_string(r.qhat1),
                     r.claim_ok ? "1" : "0"});
  write_text_file(dir + "/profile.csv", csv);

  std::string grid = "r,qhat,qhat_raw,log_ratio\n";
  for (const auto& g : prof.grid)
    grid += csv_join({format_double(g.r), std::to_string(g.qhat),
                      std::to_string(g.qhat_raw),
                      g.has_ratio ? format_double(g.log_ratio) : ""});
  write_text_file(dir + "/profile_grid.csv", grid);

  Json j = Json::object();
  j.set("max_log_ratio", Json::real(prof.max_log_ratio));
  j.set("claim_all_ok", Json::boolean(prof.claim_all_ok));
  emit_json(dir, "profile.json", j);
  return 0;
}

int run_embed(const EmbedArgs& a) {
  auto cloud = load_cloud(a.points, a.matrix);
  auto emb = embed_cloud(cloud, a.nmin, a.nmax);
  auto rep = distortion_report(cloud, emb, a.threads);
  std::string dir = resolve_out(a.out);

  Json sched = Json::object();
  Json garr = Json::array();
  for (long long g : emb.schedule.sizes()) garr.push(Json::integer(g));
  sched.set("G", std::move(garr));
  sched.set("K", Json::integer(emb.schedule.total()));

  Json imgs = Json::array();
  for (const auto& tp : emb.images) imgs.push(real_array(tp.coords));

  Json ej = Json::object();
  ej.set("schedule", std::move(sched));
  ej.set("images", std::move(imgs));
  emit_json(dir, "embedding.json", ej);

  Json worst = Json::array();
  for (const auto& p : rep.worst_pairs) {
    Json w = Json::object();
    w.set("i", Json::integer(static_cast<long long>(p.i)));
    w.set("j", Json::integer(static_cast<long long>(p.j)));
    w.set("d", Json::real(p.d));
    w.set("dg", Json::real(p.dg));
    w.set("ratio", Json::real(p.ratio));
    w.set("banded", Json::boolean(p.banded));
    w.set("band_n", Json::integer(p.band_n));
    worst.push(std::move(w));
  }
  Json dj = Json::object();
  dj.set("lipschitz_ok", Json::boolean(rep.lipschitz_ok));
  dj.set("band_ok", Json::boolean(rep.band_ok));
  dj.set("pairs", Json::integer(static_cast<long long>(rep.pairs)));
  dj.set("banded_pairs", Json::integer(static_cast<long long>(rep.banded_pairs)));
  dj.set("unbanded_pairs", Json::integer(static_cast<long long>(rep.unbanded_pairs)));
  dj.set("skipped_pairs", Json::integer(static_cast<long long>(rep.skipped_pairs)));
  dj.set("max_ratio", Json::real(rep.max_ratio));
  dj.set("min_band_ratio", Json::real(rep.min_band_ratio));
  dj.set("worst_pairs", std::move(worst));
  emit_json(dir, "distortion.json", dj);
  return 0;
}

CantorSystem build_system(const CantorArgs& a) {
  auto sched = BlockSchedule::parse(a.G, a.nmax);
  return CantorSystem::build(parse_rat(a.epsilon), std::move(sched), a.depth);
}

int run_cantor(const CantorArgs& a) {
  auto sys = build_system(a);
  std::string dir = resolve_out(a.out);

  Json desc = sys.descriptor();
  auto acc = measure_account(sys);
  Json meas = Json::object();
  meas.set("sum_b", Json::str(rat_string(acc.sum_b)));
  meas.set("product_lower", Json::str(rat_string(acc.product_lower)));
  meas.set("sum_omitted_trunc", Json::real(acc.sum_omitted_trunc));
  meas.set("bounds_ok", Json::boolean(acc.bounds_ok));
  desc.set("measure", std::move(meas));
  emit_json(dir, "system.json", desc);

  if (a.verify > 0) {
    Rng rng(a.seed);
    const long long K = sys.coords();
    const int P = sys.depth();
    auto random_code = [&] {
      CodePoint cp;
      cp.codes.reserve(static_cast<size_t>(K));
      for (long long k = 0; k < K; ++k) {
        std::string code(static_cast<size_t>(P), '0');
        for (int p = 0; p < P; ++p)
          if (rng.coin()) code[static_cast<size_t>(p)] = '1';
        cp.codes.push_back(std::move(code));
      }
      return cp;
    };
    std::vector<std::pair<CodePoint, CodePoint>> pairs;
    pairs.reserve(static_cast<size_t>(a.verify));
    for (long long i = 0; i < a.verify; ++i)
      pairs.emplace_back(random_code(), random_code());
    auto rep = verify_modulus(sys, pairs, a.threads);

    Json vj = Json::object();
    vj.set("pairs", Json::integer(static_cast<long long>(rep.pairs)));
    vj.set("skipped", Json::integer(static_cast<long long>(rep.skipped)));
    vj.set("ratio_checked", Json::integer(static_cast<long long>(rep.ratio_checked)));
    vj.set("violations", Json::integer(static_cast<long long>(rep.violations)));
    vj.set("max_ratio", Json::real(rep.max_ratio));
    vj.set("bound_c_margin", Json::real(rep.bound_c_margin));
    Json notes = Json::array();
    for (const auto& n : rep.notes) notes.push(Json::str(n));
    vj.set("notes", std::move(notes));
    emit_json(dir, "verification.json", vj);
  }
  return 0;
}

int run_shift(const ShiftArgs& a) {
  auto sys = build_system(a);
  DiscreteMeasure mu;
  if (a.atoms > 0) {
    // seeded Haar atoms: uniform coordinates on the torus
    Rng rng(a.seed);
    for (long long i = 0; i < a.atoms; ++i) {
      TorusPoint tp;
      tp.coords.reserve(static_cast<size_t>(sys.coords()));
      for (long long k = 0; k < sys.coords(); ++k) tp.coords.push_back(rng.u01());
      mu.atoms.push_back(std::move(tp));
    }
  } else {
    auto cloud = load_cloud(a.points, a.matrix);
    if (cloud.matrix_mode())
      throw validation_error("shift atoms need coordinates, not a distance matrix");
    if (static_cast<long long>(cloud.dim()) != sys.coords())
      throw validation_error("atom file has " + std::to_string(cloud.dim()) +
                             " columns; the system has " +
                             std::to_string(sys.coords()) + " coordinates");
    for (size_t i = 0; i < cloud.size(); ++i) {
      TorusPoint tp;
      tp.coords = cloud.point(i);
      mu.atoms.push_back(std::move(tp));
    }
  }
  mu.weights.assign(mu.atoms.size(), 1.0);

  ShiftOptions so;
  so.seed = a.seed + 1;
  so.threads = a.threads;
  auto fit = shift_fit(sys, mu, a.grid_depth, so);

  std::string dir = resolve_out(a.out);
  Json j = Json::object();
  j.set("shift", real_array(fit.shift_dbl));
  Json ex = Json::array();
  for (const auto& s : fit.shift) ex.push(Json::str(rat_string(s)));
  j.set("shift_exact", std::move(ex));
  j.set("captured", Json::real(fit.captured));
  j.set("total", Json::real(fit.total));
  j.set("captured_atoms", Json::integer(static_cast<long long>(fit.captured_atoms)));
  j.set("sweep_used", Json::boolean(fit.sweep_used));
  j.set("candidates_scored", Json::integer(static_cast<long long>(fit.candidates_scored)));
  j.set("candidates_exact", Json::integer(static_cast<long long>(fit.candidates_exact)));
  emit_json(dir, "shift.json", j);
  return 0;
}

int run_gauge(const GaugeArgs& a) {
  auto h = Gauge::parse(a.gauge);
  auto ord = ord_estimate(h, a.decades);

  HatOptions ho;
  ho.decades = a.decades;
  ho.triples = static_cast<int>(a.samples);
  ho.seed = a.seed;
  ho.enforce_ord = !a.permissive;
  ho.ord_decades = a.decades;
  auto res = hat_transform(h, a.beta, ho);

  std::string dir = resolve_out(a.out);
  Json checks = Json::object();
  checks.set("mono", Json::boolean(res.report.checks.mono));
  checks.set("dominates", Json::boolean(res.report.checks.dominates));
  checks.set("subadd", Json::boolean(res.report.checks.subadd));
  checks.set("doubling", Json::boolean(res.report.checks.doubling));

  Json oj = Json::object();
  oj.set("tail_min", Json::real(ord.tail_min));
  if (ord.has_claimed) oj.set("claimed", Json::real(ord.claimed));

  Json j = Json::object();
  j.set("input", Json::str(h.spec_string()));
  j.set("beta", Json::real(a.beta));
  j.set("bounded", Json::boolean(res.report.bounded));
  if (res.report.bounded) j.set("sup_psi", Json::real(res.report.sup_psi));
  j.set("checks", std::move(checks));
  j.set("max_subadd_violation", Json::real(res.report.max_subadd_violation));
  j.set("ord", std::move(oj));
  emit_json(dir, "hat.json", j);

  std::string table = "r,h\n";
  const auto& rs = res.gauge.grid_r();
  const auto& hs = res.gauge.grid_h();
  for (size_t i = 0; i < rs.size(); ++i)
    table += csv_join({format_double(rs[i]), format_double(hs[i])});
  write_text_file(dir + "/hat_table.csv", table);

  std::string oc = "r,value\n";
  for (size_t i = 0; i < ord.r.size(); ++i)
    oc += csv_join({format_double(ord.r[i]), format_double(ord.value[i])});
  write_text_file(dir + "/ord.csv", oc);
  return 0;
}

int run_extend(const ExtendArgs& a) {
  auto cloud = load_cloud(a.points, a.matrix);
  if (a.anchors.empty()) throw io_error("an --anchors file is required");
  auto rows = read_csv(a.anchors);
  if (rows.empty()) throw io_error("no anchor rows in " + a.anchors);

  SampledMap an;
  for (const auto& row : rows) {
    if (row.size() < 2) throw io_error("anchor rows need index,value,...");
    std::vector<double> vals;
    for (size_t c = 1; c < row.size(); ++c)
      vals.push_back(cell_double(row[c], "anchor value"));
    an.anchors.emplace_back(cell_index(row[0], "anchor index"), std::move(vals));
  }

  auto h = Gauge::parse(a.gauge);
  std::vector<size_t> queries(cloud.size());
  for (size_t i = 0; i < queries.size(); ++i) queries[i] = i;
  auto vals = mcshane_extend(an, h, cloud, queries, a.threads);

  std::string dir = resolve_out(a.out);
  const size_t T = vals.empty() ? 0 : vals[0].size();
  std::string header;
  for (size_t c = 0; c < T; ++c) header += (c ? ",v" : "v") + std::to_string(c + 1);
  std::string csv = header + "\n";
  for (const auto& row : vals) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(format_double(v));
    csv += csv_join(cells);
  }
  write_text_file(dir + "/extension.csv", csv);

  // extension modulus on sampled pairs, sup-norm in the target
  std::vector<std::pair<double, double>> pairs;
  const size_t n = cloud.size();
  auto pair_of = [&](size_t i, size_t j) {
    double dy = 0.0;
    for (size_t c = 0; c < T; ++c) dy = std::max(dy, std::fabs(vals[i][c] - vals[j][c]));
    pairs.emplace_back(cloud.dist(i, j), dy);
  };
  if (n >= 2 && n * (n - 1) / 2 <= 2000) {
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) pair_of(i, j);
  } else if (n >= 2) {
    Rng rng(a.seed);
    for (int k = 0; k < 2000; ++k) {
      size_t i = rng.index(n), j = rng.index(n);
      if (i != j) pair_of(i, j);
    }
  }

  Json j = Json::object();
  j.set("points", Json::integer(static_cast<long long>(n)));
  j.set("anchors", Json::integer(static_cast<long long>(an.anchors.size())));
  j.set("target_dim", Json::integer(static_cast<long long>(T)));
  j.set("gauge", Json::str(h.spec_string()));
  bool fit_ok = false;
  if (pairs.size() >= 10) {
    try {
      auto fit = modulus_fit(pairs);
      Json fj = Json::object();
      fj.set("beta_hat", Json::real(fit.beta_hat));
      fj.set("log_constant", Json::real(fit.log_constant));
      fj.set("pairs_used", Json::integer(static_cast<long long>(fit.pairs_used)));
      fj.set("dropped", Json::integer(static_cast<long long>(fit.dropped)));
      j.set("fit", std::move(fj));
      fit_ok = true;
    } catch (const validation_error&) {
      // constant or distance-degenerate extensions carry no log-log envelope
    }
  }
  j.set("fit_ok", Json::boolean(fit_ok));
  emit_json(dir, "extension.json", j);
  return 0;
}

int run_curve(const CurveArgs& a) {
  if (a.samples < 2) throw validation_error("--samples must be at least 2");
  std::string header = "t";
  for (int c = 1; c <= a.m; ++c) header += ",x" + std::to_string(c);
  std::string csv = header + "\n";
  for (long long i = 0; i < a.samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(a.samples - 1);
    auto pt = hilbert_curve(a.m, a.order, t);
    std::vector<std::string> cells{format_double(t)};
    for (double v : pt) cells.push_back(format_double(v));
    csv += csv_join(cells);
  }
  std::string dir = resolve_out(a.out);
  write_text_file(dir + "/curve.csv", csv);
  return 0;
}

int run_ifs(const IfsArgs& a) {
  if (a.ifs.empty()) throw io_error("an --ifs file is required");
  auto ifs = load_ifs(a.ifs);
  const double s = moran_dimension(ifs);

  std::string dir = resolve_out(a.out);
  Json j = Json::object();
  j.set("dim", Json::integer(static_cast<long long>(ifs.dim())));
  j.set("map_count", Json::integer(static_cast<long long>(ifs.maps.size())));
  Json ratios = Json::array();
  for (const auto& f : ifs.maps) ratios.push(Json::real(f.ratio()));
  j.set("ratios", std::move(ratios));
  j.set("moran_dimension", Json::real(s));
  j.set("axis_mode", Json::boolean(ifs.axis_mode()));
  if (ifs.open_set) {
    auto osc = osc_check(ifs, *ifs.open_set);
    Json oj = Json::object();
    oj.set("contained", Json::boolean(osc.contained));
    oj.set("disjoint", Json::boolean(osc.disjoint));
    oj.set("exact", Json::boolean(osc.exact));
    j.set("osc", std::move(oj));
  }
  emit_json(dir, "ifs.json", j);

  auto sample = attractor_points(ifs, a.depth, a.threads);
  std::string header = "label";
  for (size_t c = 1; c <= sample.dim; ++c) header += ",x" + std::to_string(c);
  std::string csv = header + "\n";
  for (size_t i = 0; i < sample.size(); ++i) {
    std::vector<std::string> cells{sample.label(i)};
    for (double v : sample.point(i)) cells.push_back(format_double(v));
    csv += csv_join(cells);
  }
  write_text_file(dir + "/attractor.csv", csv);
  return 0;
}

int run_dimension(const DimensionArgs& a) {
  PointCloud cloud = [&] {
    if (!a.ifs.empty()) {
      if (!a.points.empty())
        throw io_error("give either --points or --ifs, not both");
      return attractor_points(load_ifs(a.ifs), a.depth, a.threads).cloud();
    }
    return load_cloud(a.points, a.matrix);
  }();

  if (a.nmin > a.nmax) throw validation_error("--nmin must not exceed --nmax");
  std::vector<double> radii;
  for (int n = a.nmin; n <= a.nmax; ++n) radii.push_back(std::ldexp(1.0, -n));
  auto series = box_dimension(cloud, radii, a.threads);

  std::string dir = resolve_out(a.out);
  std::string csv = "r,count\n";
  for (size_t i = 0; i < series.r.size(); ++i)
    csv += csv_join({format_double(series.r[i]), std::to_string(series.count[i])});
  write_text_file(dir + "/boxcount.csv", csv);

  Json j = Json::object();
  j.set("slope", Json::real(series.slope));
  j.set("radii", real_array(series.r));
  Json counts = Json::array();
  for (size_t c : series.count) counts.push(Json::integer(static_cast<long long>(c)));
  j.set("counts", std::move(counts));
  if (!a.gauge.empty()) {
    if (!(a.delta > 0.0)) throw validation_error("a premeasure bound needs --delta > 0");
    auto pb = hausdorff_premeasure_upper(cloud, Gauge::parse(a.gauge), a.delta);
    Json pj = Json::object();
    pj.set("delta", Json::real(a.delta));
    pj.set("upper_bound", Json::real(pb.upper_bound));
    pj.set("clusters", Json::integer(static_cast<long long>(pb.clusters)));
    pj.set("max_diameter", Json::real(pb.max_diameter));
    j.set("premeasure", std::move(pj));
  }
  emit_json(dir, "dimension.json", j);
  return 0;
}

int run_pipeline(const PipelineArgs& a) {
  auto cloud = load_cloud(a.points, a.matrix);
  if (a.normalize) cloud = cloud.normalized();

  CubeMapOptions opt;
  opt.n_min = a.nmin;
  opt.n_max = a.nmax;
  opt.epsilon = parse_rat(a.epsilon);
  opt.depth = a.depth;
  opt.grid_depth = a.grid_depth;
  opt.order = a.order;
  opt.beta = a.beta;
  if (!a.gauge.empty()) opt.gauge = Gauge::parse(a.gauge);
  opt.seed = a.seed;
  opt.threads = a.threads;
  auto res = map_onto_cube(cloud, {}, a.m, opt);

  std::string dir = resolve_out(a.out);
  emit_json(dir, "pipeline.json", res.to_json());

  std::string header;
  for (int c = 1; c <= a.m; ++c) header += (c > 1 ? ",y" : "y") + std::to_string(c);
  std::string csv = header + "\n";
  for (const auto& row : res.values) {
    std::vector<std::string> cells;
    for (double v : row) cells.push_back(format_double(v));
    csv += csv_join(cells);
  }
  write_text_file(dir + "/values.csv", csv);
  return 0;
}

// ==== flag registration ====

void add_common(CLI::App* sub, CommonArgs& a, bool io = true) {
  if (io) {
    sub->add_option("--points", a.points, "point rows CSV");
    sub->add_option("--matrix", a.matrix, "square distance-matrix CSV");
  }
  sub->add_option("--out", a.out, "output directory (default .)");
  sub->add_option("--threads", a.threads, "worker threads (default 1)");
  sub->add_option("--seed", a.seed, "RNG seed (default 0)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weighted-torus embeddings, interval systems, gauges, and cube maps"};
  app.require_subcommand(1);

  ProfileArgs profile_a;
  auto* profile = app.add_subcommand("profile", "covering-number profile of a cloud");
  add_common(profile, profile_a);
  profile->add_option("--nmin", profile_a.nmin, "coarsest scale (default 0)");
  profile->add_option("--nmax,--n", profile_a.nmax, "finest scale (default 6)");

  EmbedArgs embed_a;
  auto* embed = app.add_subcommand("embed", "embed a cloud into the weighted torus");
  add_common(embed, embed_a);
  embed->add_option("--nmin", embed_a.nmin, "coarsest stage (default 0)");
  embed->add_option("--nmax,--n", embed_a.nmax, "finest stage (default 3)");

  CantorArgs cantor_a;
  auto* cantor = app.add_subcommand("cantor", "build an interval system, optionally verify its modulus");
  add_common(cantor, cantor_a, false);
  cantor->add_option("--epsilon", cantor_a.epsilon, "mass budget, exact rational (default 1/10)");
  cantor->add_option("--G", cantor_a.G, "block size spec (default list:1)");
  cantor->add_option("--nmax,--n", cantor_a.nmax, "finest block level (default 3)");
  cantor->add_option("--depth", cantor_a.depth, "interval tree depth (default 12)");
  cantor->add_option("--verify", cantor_a.verify, "random code pairs to certify");

  ShiftArgs shift_a;
  auto* shift = app.add_subcommand("shift", "capture a discrete measure by translating the system");
  add_common(shift, shift_a);
  shift->add_option("--epsilon", shift_a.epsilon, "mass budget, exact rational (default 1/10)");
  shift->add_option("--G", shift_a.G, "block size spec (default list:1)");
  shift->add_option("--nmax,--n", shift_a.nmax, "finest block level (default 3)");
  shift->add_option("--depth", shift_a.depth, "interval tree depth (default 12)");
  shift->add_option("--grid-depth", shift_a.grid_depth, "dyadic shift grid depth (default 12)");
  shift->add_option("--atoms", shift_a.atoms, "generate this many seeded uniform atoms instead of reading --points");

  GaugeArgs gauge_a;
  auto* gauge = app.add_subcommand("gauge", "exponent estimate and subadditive envelope of a gauge");
  add_common(gauge, gauge_a, false);
  gauge->add_option("--gauge", gauge_a.gauge, "pow:<b> | logpow:<b>,<g> | table:<csv> (default pow:1)");
  gauge->add_option("--beta", gauge_a.beta, "envelope exponent (default 1)");
  gauge->add_option("--decades", gauge_a.decades, "grid decades (default 40)");
  gauge->add_option("--samples", gauge_a.samples, "subadditivity triples (default 10000)");
  gauge->add_flag("--permissive", gauge_a.permissive, "skip the exponent precondition check");

  ExtendArgs extend_a;
  auto* extend = app.add_subcommand("extend", "minimal gauge-modulus extension of anchored values");
  add_common(extend, extend_a);
  extend->add_option("--anchors", extend_a.anchors, "CSV rows: index,value,...");
  extend->add_option("--gauge", extend_a.gauge, "extension modulus (default pow:1)");

  CurveArgs curve_a;
  auto* curve = app.add_subcommand("curve", "sample a space-filling curve as CSV");
  add_common(curve, curve_a, false);
  curve->add_option("--m", curve_a.m, "target dimension (default 2)");
  curve->add_option("--order", curve_a.order, "curve order (default 6)");
  curve->add_option("--samples", curve_a.samples, "rows to emit (default 1024)");

  IfsArgs ifs_a;
  auto* ifs = app.add_subcommand("ifs", "similarity dimension, OSC report, and attractor sample");
  add_common(ifs, ifs_a, false);
  ifs->add_option("--ifs", ifs_a.ifs, "IFS descriptor JSON");
  ifs->add_option("--depth", ifs_a.depth, "word length for the sample (default 5)");

  DimensionArgs dim_a;
  auto* dimension = app.add_subcommand("dimension", "box-counting estimate, optional premeasure bound");
  add_common(dimension, dim_a);
  dimension->add_option("--ifs", dim_a.ifs, "sample this IFS instead of reading points");
  dimension->add_option("--depth", dim_a.depth, "IFS sample depth (default 5)");
  dimension->add_option("--nmin", dim_a.nmin, "coarsest radius exponent (default 2)");
  dimension->add_option("--nmax,--n", dim_a.nmax, "finest radius exponent (default 6)");
  dimension->add_option("--gauge", dim_a.gauge, "premeasure gauge");
  dimension->add_option("--delta", dim_a.delta, "premeasure cover scale");

  PipelineArgs pipe_a;
  auto* pipeline = app.add_subcommand("pipeline", "map a cloud onto the unit cube end to end");
  add_common(pipeline, pipe_a);
  pipeline->add_option("--m", pipe_a.m, "cube dimension (default 1)");
  pipeline->add_option("--nmin", pipe_a.nmin, "coarsest embedding stage (default 0)");
  pipeline->add_option("--nmax,--n", pipe_a.nmax, "finest embedding stage (default 3)");
  pipeline->add_option("--epsilon", pipe_a.epsilon, "mass budget, exact rational (default 1/10)");
  pipeline->add_option("--depth", pipe_a.depth, "interval tree depth (default 12)");
  pipeline->add_option("--grid-depth", pipe_a.grid_depth, "shift grid depth (default 12)");
  pipeline->add_option("--order", pipe_a.order, "curve order for m >= 2 (default 8)");
  pipeline->add_option("--beta", pipe_a.beta, "extension gauge exponent (default 0.9)");
  pipeline->add_option("--gauge", pipe_a.gauge, "extension gauge, overrides --beta");
  pipeline->add_flag("--normalize", pipe_a.normalize, "rescale the cloud to diameter 1 first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::string msg = e.what();
    if (argc > 1 && msg.find("subcommand is required") != std::string::npos)
      msg += std::string(": got '") + argv[1] + "'";
    std::fprintf(stderr, "metrifract: %s\n", msg.c_str());
    return 2;
  }

  try {
    if (profile->parsed()) return run_profile(profile_a);
    if (embed->parsed()) return run_embed(embed_a);
    if (cantor->parsed()) return run_cantor(cantor_a);
    if (shift->parsed()) return run_shift(shift_a);
    if (gauge->parsed()) return run_gauge(gauge_a);
    if (extend->parsed()) return run_extend(extend_a);
    if (curve->parsed()) return run_curve(curve_a);
    if (ifs->parsed()) return run_ifs(ifs_a);
    if (dimension->parsed()) return run_dimension(dim_a);
    if (pipeline->parsed()) return run_pipeline(pipe_a);
    std::fprintf(stderr, "metrifract: no command selected\n");
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "metrifract: %s\n", e.what());
    return 2;
  } catch (const validation_error& e) {
    std::fprintf(stderr, "metrifract: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "metrifract: %s\n", e.what());
    return 1;
  }
}
