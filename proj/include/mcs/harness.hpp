#pragma once

// Experiment driver: relMSE of compressive reconstruction against scale, for
// several noise levels and oversampling factors, averaged over independent
// draws of the measurement matrix. Writes long-form CSV, a per-cell summary,
// timings, a manifest and one SVG per noise level.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcs/error.hpp"
#include "mcs/geometry.hpp"
#include "mcs/gmra.hpp"
#include "mcs/measurement.hpp"
#include "mcs/recovery.hpp"
#include "mcs/rng.hpp"
#include "mcs/stats.hpp"
#include "mcs/types.hpp"

namespace mcs {

// ---------------------------------------------------------------------------
// Metrics

/// sqrt((1/n) sum ||x_i - r_i||^2 / ||x_i||^2).
inline double rel_mse(const RowMatrix& points, const RowMatrix& recon) {
  if (points.rows() != recon.rows() || points.cols() != recon.cols()) {
    throw std::invalid_argument("rel_mse: point and reconstruction shapes differ");
  }
  if (points.rows() == 0) throw std::invalid_argument("rel_mse: no points");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double nx = points.row(i).squaredNorm();
    if (nx == 0.0) throw std::invalid_argument("rel_mse: point " + std::to_string(i) + " has zero norm");
    acc += (points.row(i) - recon.row(i)).squaredNorm() / nx;
  }
  return std::sqrt(acc / static_cast<double>(points.rows()));
}

inline double rel_mse(const PointCloud& points, const PointCloud& recon) {
  return rel_mse(points.points(), recon.points());
}

/// max_i ||x_i - r_i||^2 / ||x_i||^2.
inline double max_sq_rel_err(const RowMatrix& points, const RowMatrix& recon) {
  double mx = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    mx = std::max(mx, (points.row(i) - recon.row(i)).squaredNorm() / points.row(i).squaredNorm());
  return mx;
}

/// P_{j, k_j(x_i)}(x_i) for every row.
inline RowMatrix project_rows(const MultiscaleDictionary& dict, const RowMatrix& points, int j) {
  require_dim(points.cols(), dict.ambient_dim(), "project_rows");
  const KdTree tree(dict.centers(j));
  RowMatrix out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Vector x = points.row(i).transpose();
    out.row(i) = dict.projector(j, tree.nearest(x).index).apply(x).transpose();
  }
  return out;
}

/// relMSE of the uncompressed scale-J projection; J defaults to the finest scale.
inline double rel_mse_baseline(const RowMatrix& points, const MultiscaleDictionary& dict, std::optional<int> J = {}) {
  return rel_mse(points, project_rows(dict, points, J ? *J : dict.max_scale()));
}

inline double rel_mse_baseline(const PointCloud& points, const MultiscaleDictionary& dict, std::optional<int> J = {}) {
  return rel_mse_baseline(points.points(), dict, J);
}

// ---------------------------------------------------------------------------
// Configuration

struct DatasetSpec {
  std::string generator = "swiss_roll";  // swiss_roll | sphere | csv
  std::size_t n = 20000;
  int intrinsic_dim = 2;                 // sphere dimension d
  Eigen::Index ambient_dim = 0;          // > native dimension: random isometric embedding
  std::optional<std::uint64_t> seed;     // defaults to a stream of the master seed
  std::string path;                      // csv input
};

struct ExperimentConfig {
  DatasetSpec dataset;
  BuildOptions gmra;
  std::vector<double> sigmas{0.0, 0.05, 0.1};
  std::vector<int> oversampling{2, 4, 16};
  int num_draws = 10;
  std::uint64_t seed = 1;
  std::vector<int> scales;  // empty: every scale of the dictionary
  Ensemble ensemble = Ensemble::orthoprojection;
  bool use_kdtree = true;
  std::string output_dir;   // empty: nothing written by run_experiment

  void validate() const {
    if (num_draws < 1) throw std::invalid_argument("config: num_draws must be >= 1");
    if (sigmas.empty()) throw std::invalid_argument("config: at least one sigma is required");
    for (double s : sigmas)
      if (!(s >= 0.0)) throw std::invalid_argument("config: sigmas must be >= 0");
    if (oversampling.empty()) throw std::invalid_argument("config: at least one oversampling factor is required");
    for (int f : oversampling)
      if (f < 1) throw std::invalid_argument("config: oversampling factors must be positive integers");
    for (int j : scales)
      if (j < 0) throw std::invalid_argument("config: scales must be >= 0");
    if (ensemble == Ensemble::custom) throw std::invalid_argument("config: ensemble must be gaussian or haar-orthoprojection");
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json ds = {{"generator", c.dataset.generator},
                       {"n", c.dataset.n},
                       {"intrinsic_dim", c.dataset.intrinsic_dim},
                       {"ambient_dim", c.dataset.ambient_dim},
                       {"path", c.dataset.path}};
  ds["seed"] = c.dataset.seed ? nlohmann::json(*c.dataset.seed) : nlohmann::json(nullptr);
  nlohmann::json g = {{"max_scale", c.gmra.max_scale},
                      {"auto_depth", c.gmra.auto_depth},
                      {"max_local_dim", c.gmra.max_local_dim},
                      {"energy_threshold", c.gmra.energy_threshold},
                      {"sep_constant_hint", c.gmra.sep_constant_hint},
                      {"min_cell_points", c.gmra.min_cell_points}};
  g["local_dim"] = c.gmra.local_dim ? nlohmann::json(*c.gmra.local_dim) : nlohmann::json("adaptive");
  return {{"dataset", ds},
          {"gmra", g},
          {"sigmas", c.sigmas},
          {"oversampling", c.oversampling},
          {"num_draws", c.num_draws},
          {"seed", c.seed},
          {"scales", c.scales},
          {"ensemble", to_string(c.ensemble)},
          {"use_kdtree", c.use_kdtree},
          {"output_dir", c.output_dir}};
}

/// Reads the JSON form; missing keys keep their defaults, unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  auto reject_unknown = [](const nlohmann::json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
      }
    }
  };
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown(j, {"dataset", "gmra", "sigmas", "oversampling", "num_draws", "seed", "scales", "ensemble",
                       "use_kdtree", "output_dir"},
                   "config");
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      reject_unknown(d, {"generator", "n", "intrinsic_dim", "ambient_dim", "seed", "path"}, "dataset");
      c.dataset.generator = d.value("generator", c.dataset.generator);
      c.dataset.n = d.value("n", c.dataset.n);
      c.dataset.intrinsic_dim = d.value("intrinsic_dim", c.dataset.intrinsic_dim);
      c.dataset.ambient_dim = d.value("ambient_dim", c.dataset.ambient_dim);
      c.dataset.path = d.value("path", c.dataset.path);
      if (d.contains("seed") && !d.at("seed").is_null()) c.dataset.seed = d.at("seed").get<std::uint64_t>();
    }
    if (j.contains("gmra")) {
      const auto& g = j.at("gmra");
      reject_unknown(g, {"max_scale", "auto_depth", "local_dim", "max_local_dim", "energy_threshold",
                         "sep_constant_hint", "min_cell_points"},
                     "gmra");
      c.gmra.max_scale = g.value("max_scale", c.gmra.max_scale);
      c.gmra.auto_depth = g.value("auto_depth", c.gmra.auto_depth);
      c.gmra.max_local_dim = g.value("max_local_dim", c.gmra.max_local_dim);
      c.gmra.energy_threshold = g.value("energy_threshold", c.gmra.energy_threshold);
      c.gmra.sep_constant_hint = g.value("sep_constant_hint", c.gmra.sep_constant_hint);
      c.gmra.min_cell_points = g.value("min_cell_points", c.gmra.min_cell_points);
      if (g.contains("local_dim")) {
        const auto& ld = g.at("local_dim");
        if (ld.is_string()) {
          if (ld.get<std::string>() != "adaptive") throw std::invalid_argument("config: local_dim must be an integer or \"adaptive\"");
          c.gmra.local_dim.reset();
        } else {
          c.gmra.local_dim = ld.get<int>();
        }
      }
    }
    c.sigmas = j.value("sigmas", c.sigmas);
    c.oversampling = j.value("oversampling", c.oversampling);
    c.num_draws = j.value("num_draws", c.num_draws);
    c.seed = j.value("seed", c.seed);
    c.scales = j.value("scales", c.scales);
    if (j.contains("ensemble")) c.ensemble = parse_ensemble(j.at("ensemble").get<std::string>());
    c.use_kdtree = j.value("use_kdtree", c.use_kdtree);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string dataset;
  double sigma = 0.0;
  int j = 0;
  int f = 0;
  int draw = 0;
  double rel_mse = 0.0;
  double rel_mse_J = 0.0;
  Eigen::Index d_j = 0;
  Eigen::Index m = 0;
  double max_sq_rel_err = 0.0;
  std::uint64_t matrix_seed = 0;
  std::string status = "ok";  // "ok" or a skip reason
};

struct TimingRow {
  double sigma = 0.0;
  int j = 0;
  int f = 0;
  int draw = 0;
  double ms_per_point = 0.0;
};

struct SummaryRow {
  std::string dataset;
  double sigma = 0.0;
  int j = 0;
  int f = 0;
  Eigen::Index d_j = 0;
  Eigen::Index m = 0;
  int draws = 0;
  double mean = 0.0;
  double std = 0.0;
  double rel_mse_J = 0.0;
  double uncompressed = 0.0;  // relMSE of P_{j, k_j(x)}(x) at this scale
  double max_sq_rel_err_mean = 0.0;
  double ms_per_point_mean = 0.0;
};

struct SigmaInfo {
  double sigma = 0.0;
  int J = 0;
  double rel_mse_J = 0.0;
  double mean_norm = 0.0;
  std::vector<Eigen::Index> d_j;
  std::vector<Eigen::Index> K;
  std::vector<double> uncompressed;  // per scale
  nlohmann::json dictionary_provenance;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string dataset;
  std::vector<ResultRow> rows;
  std::vector<TimingRow> timing;
  std::vector<SummaryRow> summary;
  std::vector<SigmaInfo> sigmas;

  /// Summary row for (sigma index, j, f), if present.
  const SummaryRow* find(std::size_t sigma_index, int j, int f) const {
    for (const auto& s : summary)
      if (s.sigma == sigmas.at(sigma_index).sigma && s.j == j && s.f == f) return &s;
    return nullptr;
  }
};

inline PointCloud make_dataset(const DatasetSpec& ds, std::uint64_t master_seed) {
  const std::uint64_t seed = ds.seed ? *ds.seed : derive_seed(master_seed, 1);
  PointCloud base = [&]() -> PointCloud {
    if (ds.generator == "swiss_roll") return gen_swiss_roll(ds.n, seed);
    if (ds.generator == "sphere") return gen_sphere(ds.n, ds.intrinsic_dim, seed);
    if (ds.generator == "csv") {
      if (ds.path.empty()) throw std::invalid_argument("dataset: csv generator needs a path");
      return load_csv(ds.path);
    }
    throw std::invalid_argument("dataset: unknown generator '" + ds.generator + "'");
  }();
  if (ds.ambient_dim > base.ambient_dim()) {
    const auto e = random_isometric_embedding(base.ambient_dim(), ds.ambient_dim, derive_seed(seed, 0xE3BED));
    return PointCloud(embed(base, e).points(), base.label());
  }
  if (ds.ambient_dim != 0 && ds.ambient_dim < base.ambient_dim()) {
    throw std::invalid_argument("dataset: ambient_dim is below the generator's dimension");
  }
  return base;
}

inline std::string dataset_name(const DatasetSpec& ds) {
  std::string name = ds.generator == "sphere" ? "sphere" + std::to_string(ds.intrinsic_dim) : ds.generator;
  if (ds.generator == "csv") name = std::filesystem::path(ds.path).stem().string();
  if (ds.ambient_dim > 0) name += "_D" + std::to_string(ds.ambient_dim);
  return name;
}

/// m = min(d_j f, D).
inline Eigen::Index measurement_count(Eigen::Index d_j, int f, Eigen::Index D) {
  return std::min<Eigen::Index>(d_j * f, D);
}

/// Seed of draw `draw` for noise level `sigma_index`, factor f and size m.
inline std::uint64_t matrix_seed(std::uint64_t master, std::size_t sigma_index, int f, int draw, Eigen::Index m) {
  return derive_seed(master, {3, static_cast<std::uint64_t>(sigma_index), static_cast<std::uint64_t>(f),
                              static_cast<std::uint64_t>(draw), static_cast<std::uint64_t>(m)});
}

inline void write_outputs(const ExperimentResult& res, const std::string& dir);

/// Runs the full protocol. Deterministic in the configuration: every random
/// quantity derives from the master seed, and results are produced in a fixed
/// loop order.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  res.config = cfg;
  res.dataset = dataset_name(cfg.dataset);
  const PointCloud clean = make_dataset(cfg.dataset, cfg.seed);
  const Eigen::Index D = clean.ambient_dim();

  for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
    const double sigma = cfg.sigmas[si];
    const PointCloud data = add_noise(clean, sigma, derive_seed(cfg.seed, {2, static_cast<std::uint64_t>(si)}));
    const RowMatrix& X = data.points();
    const MultiscaleDictionary dict = build_dictionary(data, cfg.gmra);
    const int J = dict.max_scale();

    SigmaInfo info;
    info.sigma = sigma;
    info.J = J;
    info.dictionary_provenance = dict.provenance();
    for (Eigen::Index i = 0; i < X.rows(); ++i) info.mean_norm += X.row(i).norm();
    info.mean_norm /= static_cast<double>(X.rows());
    for (int j = 0; j <= J; ++j) {
      info.d_j.push_back(dict.max_local_dim(j));
      info.K.push_back(dict.size(j));
      info.uncompressed.push_back(rel_mse(X, project_rows(dict, X, j)));
    }
    info.rel_mse_J = info.uncompressed.back();

    std::vector<int> scales = cfg.scales;
    if (scales.empty())
      for (int j = 0; j <= J; ++j) scales.push_back(j);

    for (int f : cfg.oversampling) {
      for (int j : scales) {
        if (j > J) {
          ResultRow row;
          row.dataset = res.dataset;
          row.sigma = sigma;
          row.j = j;
          row.f = f;
          row.draw = -1;
          row.rel_mse = std::numeric_limits<double>::quiet_NaN();
          row.rel_mse_J = info.rel_mse_J;
          row.status = "skipped: scale beyond dictionary depth " + std::to_string(J);
          res.rows.push_back(row);
          continue;
        }
        const Eigen::Index dj = info.d_j[static_cast<std::size_t>(j)];
        const Eigen::Index m = measurement_count(dj, f, D);
        std::vector<double> vals, maxes, times;
        for (int draw = 0; draw < cfg.num_draws; ++draw) {
          const std::uint64_t ms = matrix_seed(cfg.seed, si, f, draw, m);
          const MeasurementMatrix M = make_matrix(cfg.ensemble, m, D, ms);
          const Recoverer rec(M, dict, RecoverOptions{cfg.use_kdtree});
          const RowMatrix Y = M.apply_rows(X);
          const auto t0 = std::chrono::steady_clock::now();
          const RowMatrix R = rec.recover_rows(Y, j);
          const auto t1 = std::chrono::steady_clock::now();
          ResultRow row;
          row.dataset = res.dataset;
          row.sigma = sigma;
          row.j = j;
          row.f = f;
          row.draw = draw;
          row.rel_mse = rel_mse(X, R);
          row.rel_mse_J = info.rel_mse_J;
          row.d_j = dj;
          row.m = m;
          row.max_sq_rel_err = max_sq_rel_err(X, R);
          row.matrix_seed = ms;
          res.rows.push_back(row);
          const double ms_pp = std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(X.rows());
          res.timing.push_back(TimingRow{sigma, j, f, draw, ms_pp});
          vals.push_back(row.rel_mse);
          maxes.push_back(row.max_sq_rel_err);
          times.push_back(ms_pp);
        }
        const auto st = mean_std(vals);
        SummaryRow s;
        s.dataset = res.dataset;
        s.sigma = sigma;
        s.j = j;
        s.f = f;
        s.d_j = dj;
        s.m = m;
        s.draws = cfg.num_draws;
        s.mean = st.mean;
        s.std = st.std;
        s.rel_mse_J = info.rel_mse_J;
        s.uncompressed = info.uncompressed[static_cast<std::size_t>(j)];
        s.max_sq_rel_err_mean = mean_std(maxes).mean;
        s.ms_per_point_mean = mean_std(times).mean;
        res.summary.push_back(s);
      }
    }
    res.sigmas.push_back(std::move(info));
  }
  if (!cfg.output_dir.empty()) write_outputs(res, cfg.output_dir);
  return res;
}

// ---------------------------------------------------------------------------
// Output

inline std::string results_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os << "dataset,sigma,j,f,draw,relMSE,relMSE_J,d_j,m,max_sq_rel_err,matrix_seed,external_relMSE,status\n";
  for (const auto& r : res.rows) {
    os << r.dataset << ',' << detail::format_double(r.sigma) << ',' << r.j << ',' << r.f << ',' << r.draw << ','
       << (std::isnan(r.rel_mse) ? std::string() : detail::format_double(r.rel_mse)) << ','
       << detail::format_double(r.rel_mse_J) << ',' << r.d_j << ',' << r.m << ','
       << detail::format_double(r.max_sq_rel_err) << ',' << r.matrix_seed << ",," << r.status << '\n';
  }
  return os.str();
}

inline std::string summary_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os << "dataset,sigma,j,f,d_j,m,draws,relMSE_mean,relMSE_std,relMSE_J,relMSE_uncompressed_j,max_sq_rel_err_mean\n";
  for (const auto& s : res.summary) {
    os << s.dataset << ',' << detail::format_double(s.sigma) << ',' << s.j << ',' << s.f << ',' << s.d_j << ','
       << s.m << ',' << s.draws << ',' << detail::format_double(s.mean) << ',' << detail::format_double(s.std) << ','
       << detail::format_double(s.rel_mse_J) << ',' << detail::format_double(s.uncompressed) << ','
       << detail::format_double(s.max_sq_rel_err_mean) << '\n';
  }
  return os.str();
}

inline std::string timing_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os << "sigma,j,f,draw,ms_per_point\n";
  for (const auto& t : res.timing) {
    os << detail::format_double(t.sigma) << ',' << t.j << ',' << t.f << ',' << t.draw << ','
       << detail::format_double(t.ms_per_point) << '\n';
  }
  return os.str();
}

inline nlohmann::json manifest_json(const ExperimentResult& res) {
  nlohmann::json sig = nlohmann::json::array();
  for (const auto& s : res.sigmas) {
    sig.push_back({{"sigma", s.sigma},
                   {"J", s.J},
                   {"relMSE_J", s.rel_mse_J},
                   {"mean_point_norm", s.mean_norm},
                   {"d_j", s.d_j},
                   {"K_j", s.K},
                   {"relMSE_uncompressed", s.uncompressed},
                   {"dictionary", s.dictionary_provenance}});
  }
  return {{"config", to_json(res.config)},
          {"dataset", res.dataset},
          {"swiss_roll_parameterization", "(t cos t, h, t sin t), t ~ U[3pi/2, 9pi/2], h ~ U[0, 21]"},
          {"noise_model", "N(0, sigma^2/D I_D) per point; dictionary rebuilt on the noisy cloud"},
          {"matrix_rule", "m = min(d_j f, D); a fresh matrix per (sigma, f, draw); the dictionary is shared by all draws"},
          {"format_version", kFormatVersion},
          {"per_sigma", sig}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

// ---------------------------------------------------------------------------
// SVG

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// One SVG document for noise level `sigma_index`: log-scale relMSE against
/// scale, a curve and a +-1 std band per oversampling factor, and the
/// dashed relMSE_J baseline.
inline std::string render_svg(const ExperimentResult& res, std::size_t sigma_index) {
  const SigmaInfo& info = res.sigmas.at(sigma_index);
  std::map<int, std::vector<const SummaryRow*>> curves;
  for (const auto& s : res.summary)
    if (s.sigma == info.sigma) curves[s.f].push_back(&s);
  if (curves.empty()) throw std::invalid_argument("nothing to plot");

  int jmin = std::numeric_limits<int>::max(), jmax = std::numeric_limits<int>::min();
  double ymin = info.rel_mse_J > 0 ? info.rel_mse_J : std::numeric_limits<double>::infinity(), ymax = info.rel_mse_J;
  for (const auto& [f, rows] : curves) {
    for (const auto* r : rows) {
      jmin = std::min(jmin, r->j);
      jmax = std::max(jmax, r->j);
      const double lo = r->mean - r->std, hi = r->mean + r->std;
      if (lo > 0) ymin = std::min(ymin, lo);
      if (r->mean > 0) ymin = std::min(ymin, r->mean);
      ymax = std::max(ymax, hi);
    }
  }
  if (!std::isfinite(ymin) || !(ymax > 0)) {
    ymin = 1e-16;
    ymax = std::max(ymax, 1.0);
  }
  double lmin = std::floor(std::log10(ymin)), lmax = std::ceil(std::log10(ymax));
  if (lmax <= lmin) lmax = lmin + 1;
  if (jmax <= jmin) jmax = jmin + 1;

  const double W = 640, H = 440, L = 70, R = 130, T = 40, B = 50;
  auto px = [&](double j) { return L + (j - jmin) / (jmax - jmin) * (W - L - R); };
  auto py = [&](double y) {
    const double ly = std::log10(std::max(y, std::pow(10.0, lmin)));
    return T + (lmax - ly) / (lmax - lmin) * (H - T - B);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<title>" << detail::svg_escape(res.dataset) << " sigma=" << info.sigma << "</title>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
  os << "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int j = jmin; j <= jmax; ++j) {
    os << "<line x1=\"" << detail::fmt(px(j)) << "\" y1=\"" << H - B << "\" x2=\"" << detail::fmt(px(j)) << "\" y2=\""
       << H - B + 4 << "\" stroke=\"black\"/>";
    os << "<text x=\"" << detail::fmt(px(j)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << j
       << "</text>\n";
  }
  for (int e = static_cast<int>(lmin); e <= static_cast<int>(lmax); ++e) {
    const double y = py(std::pow(10.0, e));
    os << "<line x1=\"" << L - 4 << "\" y1=\"" << detail::fmt(y) << "\" x2=\"" << W - R << "\" y2=\"" << detail::fmt(y)
       << "\" stroke=\"#dddddd\"/>";
    os << "<text x=\"" << L - 8 << "\" y=\"" << detail::fmt(y + 4) << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">scale j</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">relMSE</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"24\" text-anchor=\"middle\">" << detail::svg_escape(res.dataset)
     << ", sigma = " << info.sigma << "</text>\n</g>\n";

  std::size_t ci = 0;
  for (const auto& [f, rows] : curves) {
    const char* col = colors[ci++ % (sizeof colors / sizeof *colors)];
    std::ostringstream upper, lower, line;
    for (const auto* r : rows) {
      upper << detail::fmt(px(r->j)) << ',' << detail::fmt(py(r->mean + r->std)) << ' ';
      line << detail::fmt(px(r->j)) << ',' << detail::fmt(py(r->mean)) << ' ';
    }
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
      lower << detail::fmt(px((*it)->j)) << ',' << detail::fmt(py(std::max((*it)->mean - (*it)->std, 0.0))) << ' ';
    os << "<g class=\"curve\" data-f=\"" << f << "\">\n";
    os << "<polygon class=\"band\" points=\"" << upper.str() << lower.str() << "\" fill=\"" << col
       << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    os << "<polyline class=\"mean\" points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << col
       << "\" stroke-width=\"2\"/>\n";
    const double ly = T + 20.0 * static_cast<double>(ci);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">f = "
       << f << "</text>\n</g>\n";
  }
  const double by = py(info.rel_mse_J);
  os << "<line id=\"baseline\" class=\"baseline\" x1=\"" << L << "\" y1=\"" << detail::fmt(by) << "\" x2=\"" << W - R
     << "\" y2=\"" << detail::fmt(by) << "\" stroke=\"black\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"/>\n";
  const double ly = T + 20.0 * static_cast<double>(ci + 1);
  os << "<text x=\"" << W - R + 10 << "\" y=\"" << ly + 4
     << "\" font-family=\"sans-serif\" font-size=\"11\">relMSE_J (dashed)</text>\n";
  os << "</svg>\n";
  return os.str();
}

/// Writes one SVG per noise level into `dir`; returns the paths written.
inline std::vector<std::string> emit_plot(const ExperimentResult& res, const std::string& dir) {
  if (res.summary.empty() || res.sigmas.empty()) throw std::invalid_argument("nothing to plot");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  std::vector<std::string> paths;
  for (std::size_t si = 0; si < res.sigmas.size(); ++si) {
    char name[64];
    std::snprintf(name, sizeof name, "relmse_sigma%zu.svg", si);
    const auto p = std::filesystem::path(dir) / name;
    write_text(p, render_svg(res, si));
    paths.push_back(p.string());
  }
  return paths;
}

inline void write_outputs(const ExperimentResult& res, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  write_text(d / "results.csv", results_csv(res));
  write_text(d / "summary.csv", summary_csv(res));
  write_text(d / "timing.csv", timing_csv(res));
  write_text(d / "manifest.json", manifest_json(res).dump(2) + "\n");
  if (!res.summary.empty()) emit_plot(res, dir);
}

/// Rebuilds a result (without timings) from a summary CSV and manifest, for
/// re-plotting.
inline ExperimentResult load_summary(const std::string& dir) {
  const std::filesystem::path d(dir);
  ExperimentResult res;
  std::ifstream mf(d / "manifest.json");
  if (!mf) throw std::runtime_error("cannot open " + (d / "manifest.json").string());
  nlohmann::json man;
  try {
    mf >> man;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError((d / "manifest.json").string() + ": " + e.what());
  }
  res.dataset = man.value("dataset", std::string("dataset"));
  for (const auto& s : man.at("per_sigma")) {
    SigmaInfo info;
    info.sigma = s.at("sigma").get<double>();
    info.J = s.at("J").get<int>();
    info.rel_mse_J = s.at("relMSE_J").get<double>();
    info.mean_norm = s.value("mean_point_norm", 0.0);
    res.sigmas.push_back(info);
  }
  std::ifstream in(d / "summary.csv");
  if (!in) throw std::runtime_error("cannot open " + (d / "summary.csv").string());
  std::string line;
  std::getline(in, line);
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 12) throw ParseError("summary.csv: expected 12 fields", ln);
    SummaryRow s;
    double v = 0;
    s.dataset = std::string(f[0]);
    auto num = [&](std::size_t i) {
      if (!detail::parse_double(detail::trim(f[i]), v)) throw ParseError("summary.csv: non-numeric field", ln);
      return v;
    };
    s.sigma = num(1);
    s.j = static_cast<int>(num(2));
    s.f = static_cast<int>(num(3));
    s.d_j = static_cast<Eigen::Index>(num(4));
    s.m = static_cast<Eigen::Index>(num(5));
    s.draws = static_cast<int>(num(6));
    s.mean = num(7);
    s.std = num(8);
    s.rel_mse_J = num(9);
    s.uncompressed = num(10);
    s.max_sq_rel_err_mean = num(11);
    res.summary.push_back(s);
  }
  return res;
}

}  // namespace mcs
