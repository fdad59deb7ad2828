#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "metrifract/cantor.hpp"
#include "metrifract/covering.hpp"
#include "metrifract/embedding.hpp"
#include "metrifract/gauge.hpp"
#include "metrifract/geometry.hpp"
#include "metrifract/holder.hpp"
#include "metrifract/rational.hpp"
#include "metrifract/selfsimilar.hpp"

namespace py = pybind11;
using namespace metrifract;

namespace {

PointCloud cloud_of(const std::vector<std::vector<double>>& pts) {
  return PointCloud::from_points(pts);
}

py::dict hat_dict(const HatResult& res) {
  py::dict checks;
  checks["mono"] = res.report.checks.mono;
  checks["dominates"] = res.report.checks.dominates;
  checks["subadd"] = res.report.checks.subadd;
  checks["doubling"] = res.report.checks.doubling;
  py::dict d;
  d["bounded"] = res.report.bounded;
  if (res.report.bounded) d["sup_psi"] = res.report.sup_psi;
  d["checks"] = std::move(checks);
  d["r"] = res.gauge.grid_r();
  d["h"] = res.gauge.grid_h();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "weighted-torus embeddings, interval systems, gauges, and cube maps";

  m.def("circle_dist", &circle_dist, py::arg("x"), py::arg("y"),
        "distance on the unit circle: min(|x-y|, 1-|x-y|)");

  m.def(
      "gauge_eval",
      [](const std::string& spec, double r) { return Gauge::parse(spec)(r); },
      py::arg("spec"), py::arg("r"), "evaluate a gauge spec string at r > 0");

  m.def(
      "covering_profile",
      [](const std::vector<std::vector<double>>& pts, int n_min, int n_max) {
        auto prof = covering_profile(cloud_of(pts), n_min, n_max);
        py::list rows;
        for (const auto& r : prof.rows) {
          py::dict d;
          d["n"] = r.n;
          d["eps"] = r.eps;
          d["G"] = r.G;
          d["qhat"] = py::make_tuple(r.qhat8, r.qhat4, r.qhat2, r.qhat1);
          d["claim_ok"] = r.claim_ok;
          rows.append(std::move(d));
        }
        py::dict d;
        d["rows"] = std::move(rows);
        d["max_log_ratio"] = prof.max_log_ratio;
        d["claim_all_ok"] = prof.claim_all_ok;
        return d;
      },
      py::arg("points"), py::arg("n_min") = 0, py::arg("n_max") = 6);

  m.def(
      "embedding_distortion",
      [](const std::vector<std::vector<double>>& pts, int n_min, int n_max, int threads) {
        auto cloud = cloud_of(pts);
        auto emb = embed_cloud(cloud, n_min, n_max);
        auto rep = distortion_report(cloud, emb, threads);
        py::dict d;
        d["lipschitz_ok"] = rep.lipschitz_ok;
        d["band_ok"] = rep.band_ok;
        d["pairs"] = rep.pairs;
        d["banded_pairs"] = rep.banded_pairs;
        d["max_ratio"] = rep.max_ratio;
        d["min_band_ratio"] = rep.min_band_ratio;
        return d;
      },
      py::arg("points"), py::arg("n_min") = 0, py::arg("n_max") = 3,
      py::arg("threads") = 1);

  m.def(
      "interval_system_report",
      [](const std::string& epsilon, const std::string& G, int n_max, int depth,
         int verify_pairs, uint64_t seed, int threads) {
        auto sys = CantorSystem::build(parse_rat(epsilon),
                                       BlockSchedule::parse(G, n_max), depth);
        auto acc = measure_account(sys);
        py::dict d;
        d["epsilon"] = rat_string(sys.epsilon());
        d["G"] = sys.schedule().spec();
        d["depth"] = sys.depth();
        d["coords"] = sys.coords();
        d["product_lower"] = rat_double(acc.product_lower);
        d["sum_omitted_trunc"] = acc.sum_omitted_trunc;
        d["bounds_ok"] = acc.bounds_ok;
        if (verify_pairs > 0) {
          Rng rng(seed);
          auto random_code = [&] {
            CodePoint cp;
            for (long long k = 0; k < sys.coords(); ++k) {
              std::string code(static_cast<size_t>(sys.depth()), '0');
              for (int p = 0; p < sys.depth(); ++p)
                if (rng.coin()) code[static_cast<size_t>(p)] = '1';
              cp.codes.push_back(std::move(code));
            }
            return cp;
          };
          std::vector<std::pair<CodePoint, CodePoint>> pairs;
          for (int i = 0; i < verify_pairs; ++i)
            pairs.emplace_back(random_code(), random_code());
          auto rep = verify_modulus(sys, pairs, threads);
          d["verified_pairs"] = rep.pairs;
          d["violations"] = rep.violations;
          d["max_ratio"] = rep.max_ratio;
        }
        return d;
      },
      py::arg("epsilon") = "1/10", py::arg("G") = "list:1", py::arg("n_max") = 3,
      py::arg("depth") = 12, py::arg("verify_pairs") = 0, py::arg("seed") = 0,
      py::arg("threads") = 1);

  m.def(
      "ord_estimate",
      [](const std::string& spec, int decades) {
        auto est = ord_estimate(Gauge::parse(spec), decades);
        py::dict d;
        d["r"] = est.r;
        d["value"] = est.value;
        d["tail_min"] = est.tail_min;
        return d;
      },
      py::arg("spec"), py::arg("decades") = 40);

  m.def(
      "hat_transform",
      [](const std::string& spec, double beta, int decades, uint64_t seed) {
        HatOptions opt;
        opt.decades = decades;
        opt.seed = seed;
        return hat_dict(hat_transform(Gauge::parse(spec), beta, opt));
      },
      py::arg("spec"), py::arg("beta"), py::arg("decades") = 40, py::arg("seed") = 0);

  m.def(
      "moran_dimension",
      [](const std::vector<double>& ratios) {
        IFS ifs;
        for (double c : ratios) ifs.maps.push_back(Similarity::axis(c, {1}, {0.0}));
        return moran_dimension(ifs);
      },
      py::arg("ratios"), "root of sum(c_i^s) = 1; only the ratios matter");

  m.def(
      "ifs_attractor",
      [](const std::string& path, int depth, int threads) {
        auto sample = attractor_points(load_ifs(path), depth, threads);
        std::vector<std::string> labels;
        std::vector<std::vector<double>> pts;
        for (size_t i = 0; i < sample.size(); ++i) {
          labels.push_back(sample.label(i));
          pts.push_back(sample.point(i));
        }
        return py::make_tuple(std::move(labels), std::move(pts));
      },
      py::arg("path"), py::arg("depth") = 5, py::arg("threads") = 1);

  m.def(
      "box_dimension",
      [](const std::vector<std::vector<double>>& pts, const std::vector<double>& radii,
         int threads) {
        auto series = box_dimension(cloud_of(pts), radii, threads);
        py::dict d;
        d["r"] = series.r;
        d["count"] = series.count;
        d["slope"] = series.slope;
        return d;
      },
      py::arg("points"), py::arg("radii"), py::arg("threads") = 1);

  m.def(
      "mcshane_extend",
      [](const std::vector<std::vector<double>>& pts,
         const std::vector<std::pair<size_t, std::vector<double>>>& anchors,
         const std::string& gauge, int threads) {
        auto cloud = cloud_of(pts);
        SampledMap an;
        an.anchors = anchors;
        std::vector<size_t> queries(cloud.size());
        for (size_t i = 0; i < queries.size(); ++i) queries[i] = i;
        return mcshane_extend(an, Gauge::parse(gauge), cloud, queries, threads);
      },
      py::arg("points"), py::arg("anchors"), py::arg("gauge") = "pow:1",
      py::arg("threads") = 1);

  m.def(
      "modulus_fit",
      [](const std::vector<std::pair<double, double>>& pairs) {
        auto fit = modulus_fit(pairs);
        py::dict d;
        d["beta_hat"] = fit.beta_hat;
        d["log_constant"] = fit.log_constant;
        d["pairs_used"] = fit.pairs_used;
        d["dropped"] = fit.dropped;
        d["max_residual"] = fit.max_residual;
        return d;
      },
      py::arg("pairs"));

  m.def("hilbert_cell", &hilbert_cell, py::arg("m"), py::arg("order"), py::arg("index"));
  m.def("hilbert_curve", &hilbert_curve, py::arg("m"), py::arg("order"), py::arg("t"));
  m.def("interleave_map", &interleave_map, py::arg("x"), py::arg("m"),
        py::arg("precision"));

  m.def(
      "map_onto_cube",
      [](const std::vector<std::vector<double>>& pts, int m_dim,
         const std::vector<double>& weights, int n_min, int n_max,
         const std::string& epsilon, int depth, int grid_depth, int order, double beta,
         uint64_t seed, int threads) {
        CubeMapOptions opt;
        opt.n_min = n_min;
        opt.n_max = n_max;
        opt.epsilon = parse_rat(epsilon);
        opt.depth = depth;
        opt.grid_depth = grid_depth;
        opt.order = order;
        opt.beta = beta;
        opt.seed = seed;
        opt.threads = threads;
        auto res = map_onto_cube(cloud_of(pts), weights, m_dim, opt);
        py::dict moduli;
        moduli["embed_max_ratio"] = res.stage_moduli.embed_max_ratio;
        moduli["embed_min_band_ratio"] = res.stage_moduli.embed_min_band_ratio;
        moduli["code_max_ratio"] = res.stage_moduli.code_max_ratio;
        moduli["extension_beta"] = res.stage_moduli.extension_beta;
        py::dict d;
        d["captured_fraction"] = res.captured_fraction;
        d["grid_resolution"] = res.grid_resolution;
        d["beta_hat"] = res.beta_hat;
        d["stage_moduli"] = std::move(moduli);
        d["substitute_construction"] = res.substitute_construction;
        d["degenerate"] = res.degenerate;
        d["values"] = res.values;
        return d;
      },
      py::arg("points"), py::arg("m") = 1, py::arg("weights") = std::vector<double>{},
      py::arg("n_min") = 0, py::arg("n_max") = 3, py::arg("epsilon") = "1/10",
      py::arg("depth") = 12, py::arg("grid_depth") = 12, py::arg("order") = 8,
      py::arg("beta") = 0.9, py::arg("seed") = 0, py::arg("threads") = 1);
}
