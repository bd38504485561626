// mcs: command line front end for datasets, dictionaries, measurement
// matrices, recovery, bounds tables and experiments.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mcs/mcs.hpp"

namespace {

using namespace mcs;

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

std::optional<int> parse_local_dim(const std::string& s) {
  if (s == "adaptive") return std::nullopt;
  return std::stoi(s);
}

/// "sphere:<d>", "swiss_roll" or "cloud:<path>".
ManifoldOracle parse_manifold(const std::string& spec) {
  if (spec.rfind("sphere:", 0) == 0) return ManifoldOracle::sphere(std::stoi(spec.substr(7)));
  if (spec == "swiss_roll") return ManifoldOracle::swiss_roll();
  if (spec.rfind("cloud:", 0) == 0) return ManifoldOracle::dense_cloud(load_csv(spec.substr(6)));
  throw std::invalid_argument("manifold must be sphere:<d>, swiss_roll or cloud:<path>");
}

struct BuildArgs {
  int max_scale = 6;
  std::string local_dim = "2";
  int max_local_dim = 16;
  double energy = 0.95;
  int min_cell_points = 0;
  double sep_hint = 0.0;
  bool auto_depth = false;

  void add(CLI::App* app) {
    app->add_option("--max-scale", max_scale, "finest scale J (cap when --auto-depth)");
    app->add_option("--local-dim", local_dim, "local dimension d, or 'adaptive'");
    app->add_option("--max-local-dim", max_local_dim, "cap for adaptive dimensions");
    app->add_option("--energy", energy, "spectral energy threshold for adaptive dimensions");
    app->add_option("--min-cell-points", min_cell_points, "smallest cell that may split off (0: d + 1)");
    app->add_option("--sep-hint", sep_hint, "requested separation constant C1 (0: largest admissible)");
    app->add_flag("--auto-depth", auto_depth, "stop at the first scale where no cell splits");
  }
  BuildOptions options() const {
    BuildOptions o;
    o.max_scale = max_scale;
    o.local_dim = parse_local_dim(local_dim);
    o.max_local_dim = max_local_dim;
    o.energy_threshold = energy;
    o.min_cell_points = min_cell_points;
    o.sep_constant_hint = sep_hint;
    o.auto_depth = auto_depth;
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale dictionaries and compressive recovery of manifold data"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "sample a synthetic point cloud to CSV");
  std::string gen_kind = "swiss_roll", gen_out;
  std::size_t gen_n = 1000;
  int gen_d = 2;
  std::uint64_t gen_seed = 0, gen_noise_seed = 1;
  double gen_sigma = 0.0;
  Eigen::Index gen_ambient = 0;
  gen->add_option("--dataset", gen_kind, "swiss_roll or sphere")->check(CLI::IsMember({"swiss_roll", "sphere"}));
  gen->add_option("-n,--n", gen_n, "number of points");
  gen->add_option("-d,--dim", gen_d, "sphere dimension");
  gen->add_option("--seed", gen_seed, "sampling seed");
  gen->add_option("--sigma", gen_sigma, "noise level (per-point N(0, sigma^2/D I))");
  gen->add_option("--noise-seed", gen_noise_seed, "noise seed");
  gen->add_option("--ambient-dim", gen_ambient, "embed isometrically into R^D");
  gen->add_option("-o,--out", gen_out, "output CSV (default stdout)");

  // gmra
  auto* gmra = app.add_subcommand("gmra", "build or validate a multiscale dictionary");
  gmra->require_subcommand(1);
  auto* gbuild = gmra->add_subcommand("build", "build a dictionary from a CSV cloud");
  std::string gb_in, gb_out;
  BuildArgs gb_args;
  gbuild->add_option("-i,--input", gb_in, "point cloud CSV")->required();
  gbuild->add_option("-o,--out", gb_out, "dictionary file")->required();
  gb_args.add(gbuild);
  auto* gval = gmra->add_subcommand("validate", "check dictionary structure against a cloud");
  std::string gv_dict, gv_in, gv_json, gv_manifold;
  gval->add_option("--dict", gv_dict, "dictionary file")->required();
  gval->add_option("-i,--input", gv_in, "point cloud CSV")->required();
  gval->add_option("--manifold", gv_manifold, "exact manifold for the tube check: sphere:<d> or swiss_roll");
  gval->add_option("--json", gv_json, "write the full report as JSON");

  // measure
  auto* meas = app.add_subcommand("measure", "measurement matrices");
  meas->require_subcommand(1);
  auto* mmake = meas->add_subcommand("make", "draw a matrix");
  std::string mm_ens = "gaussian", mm_out;
  Eigen::Index mm_m = 0, mm_D = 0;
  std::uint64_t mm_seed = 0;
  double mm_eps = 0.3;
  mmake->add_option("--ensemble", mm_ens, "gaussian or haar-orthoprojection");
  mmake->add_option("-m,--rows", mm_m, "rows m")->required();
  mmake->add_option("-D,--cols", mm_D, "columns D")->required();
  mmake->add_option("--seed", mm_seed, "seed");
  mmake->add_option("--eps", mm_eps, "target distortion recorded with the matrix");
  mmake->add_option("-o,--out", mm_out, "matrix file")->required();
  auto* mver = meas->add_subcommand("verify", "check distortion, RIP or an assumption set");
  std::string mv_mat, mv_probes, mv_dict, mv_x, mv_manifold_csv;
  double mv_eps = 0.3;
  int mv_rip = 0, mv_set = 0;
  mver->add_option("--matrix", mv_mat, "matrix file")->required();
  mver->add_option("--probes", mv_probes, "CSV of probe points for the pairwise distortion check");
  mver->add_option("--eps", mv_eps, "distortion tolerance");
  mver->add_option("--rip", mv_rip, "brute-force RIP at this sparsity");
  mver->add_option("--assumption", mv_set, "assumption set 1 or 2 (needs --dict)");
  mver->add_option("--dict", mv_dict, "dictionary file");
  mver->add_option("--x", mv_x, "CSV with the point x (first row) for assumption set 1");
  mver->add_option("--manifold-samples", mv_manifold_csv, "CSV of manifold samples for assumption set 2");
  auto* mapply = meas->add_subcommand("apply", "measure every row of a CSV");
  std::string ma_mat, ma_in, ma_out;
  mapply->add_option("--matrix", ma_mat, "matrix file")->required();
  mapply->add_option("-i,--input", ma_in, "point cloud CSV")->required();
  mapply->add_option("-o,--out", ma_out, "measurements CSV (default stdout)");

  // recover
  auto* rec = app.add_subcommand("recover", "reconstruct points from measurements");
  std::string rc_mat, rc_dict, rc_meas, rc_out, rc_cert, rc_scale = "auto", rc_orig, rc_manifold;
  double rc_eps = 0.3, rc_delta = 0.0;
  bool rc_kdtree = false;
  rec->add_option("--matrix", rc_mat, "matrix file")->required();
  rec->add_option("--dict", rc_dict, "dictionary file")->required();
  rec->add_option("--measurements", rc_meas, "CSV of measurement rows")->required();
  rec->add_option("-j,--scale", rc_scale, "scale j or 'auto'");
  rec->add_option("-o,--out", rc_out, "reconstructions CSV (default stdout)");
  rec->add_option("--certificates", rc_cert, "certificates CSV (needs --originals)");
  rec->add_option("--originals", rc_orig, "CSV of the uncompressed points, for certificates");
  rec->add_option("--manifold", rc_manifold, "nearest-point oracle: sphere:<d>, swiss_roll or cloud:<path>");
  rec->add_option("--eps", rc_eps, "distortion used in certificates");
  rec->add_option("--delta", rc_delta, "precision parameter of the tube condition");
  rec->add_flag("--kdtree", rc_kdtree, "k-d tree search over compressed centers");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "tabulate covering and measurement bounds as CSV");
  std::vector<int> b_d{1, 2}, b_J{5};
  std::vector<double> b_eps{0.3}, b_delta{0.1};
  double b_V = 6.283185307179586, b_reach = 1.0, b_D = 100, b_C1 = 1.0, b_c = 1.0;
  std::string b_out;
  bnd->add_option("--d", b_d, "intrinsic dimensions");
  bnd->add_option("--eps", b_eps, "distortions");
  bnd->add_option("--J", b_J, "finest scales");
  bnd->add_option("--delta", b_delta, "cover radii");
  bnd->add_option("--V", b_V, "volume");
  bnd->add_option("--reach", b_reach, "reach");
  bnd->add_option("--D", b_D, "ambient dimension");
  bnd->add_option("--C1", b_C1, "separation constant");
  bnd->add_option("-c,--constant", b_c, "constant replacing the asymptotic factor");
  bnd->add_option("-o,--out", b_out, "CSV output (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "relMSE against scale experiments");
  exp->require_subcommand(1);
  auto* erun = exp->add_subcommand("run", "run an experiment from a JSON config");
  std::string er_cfg, er_out, er_ensemble;
  std::optional<std::uint64_t> er_seed;
  std::optional<int> er_draws, er_max_scale;
  std::optional<std::size_t> er_n;
  std::vector<double> er_sigmas;
  std::vector<int> er_f, er_scales;
  erun->add_option("--config", er_cfg, "JSON config");
  erun->add_option("--seed", er_seed, "master seed");
  erun->add_option("-o,--out", er_out, "output directory");
  erun->add_option("--sigmas", er_sigmas, "noise levels");
  erun->add_option("--oversampling", er_f, "oversampling factors");
  erun->add_option("--draws", er_draws, "matrix draws per cell");
  erun->add_option("--scales", er_scales, "scales to evaluate");
  erun->add_option("--n", er_n, "dataset size");
  erun->add_option("--max-scale", er_max_scale, "dictionary depth");
  erun->add_option("--ensemble", er_ensemble, "gaussian or haar-orthoprojection");
  auto* eplot = exp->add_subcommand("plot", "re-render SVGs from an experiment directory");
  std::string ep_dir, ep_out;
  eplot->add_option("--dir", ep_dir, "experiment output directory")->required();
  eplot->add_option("-o,--out", ep_out, "SVG directory (default: --dir)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      PointCloud c = gen_kind == "sphere" ? gen_sphere(gen_n, gen_d, gen_seed) : gen_swiss_roll(gen_n, gen_seed);
      if (gen_ambient > c.ambient_dim()) c = embed(c, random_isometric_embedding(c.ambient_dim(), gen_ambient, derive_seed(gen_seed, 0xE3BED)));
      c = add_noise(c, gen_sigma, gen_noise_seed);
      std::ofstream f;
      write_csv_matrix(open_out(gen_out, f), c.points());
    } else if (*gbuild) {
      const PointCloud c = load_csv(gb_in);
      const auto dict = build_dictionary(c, gb_args.options());
      save_dictionary(dict, gb_out);
      std::cerr << "J=" << dict.max_scale() << " C1=" << dict.sep_constant() << " K_j:";
      for (int j = 0; j <= dict.max_scale(); ++j) std::cerr << ' ' << dict.size(j);
      std::cerr << '\n';
    } else if (*gval) {
      const auto dict = load_dictionary(gv_dict);
      const PointCloud c = load_csv(gv_in);
      ValidationOptions vo;
      std::optional<ManifoldOracle> oracle;
      if (!gv_manifold.empty()) {
        oracle = parse_manifold(gv_manifold);
        vo.manifold_distance = [&](const Vector& x) { return (x - oracle->nearest(x)).norm(); };
      }
      const auto rep = validate_structure(dict, c, vo);
      if (!gv_json.empty()) {
        std::ofstream f(gv_json);
        f << rep.to_json().dump(2) << '\n';
      }
      std::cout << "scale,K,min_separation,separation_margin,parent_ratio,tube_ok,mean_error,max_error\n";
      for (const auto& s : rep.scales) {
        std::cout << s.scale << ',' << s.K << ',' << s.min_separation << ',' << s.separation_margin << ','
                  << s.parent_worst_ratio << ',' << s.tube_ok << ',' << s.mean_error << ',' << s.max_error << '\n';
      }
      std::cout << "# decay slope " << rep.decay.slope << " [" << rep.decay.slope_ci_low << ", "
                << rep.decay.slope_ci_high << "]\n";
      for (const auto& f : rep.failures) std::cout << "# FAIL " << f << '\n';
      return rep.all_passed() ? 0 : 1;
    } else if (*mmake) {
      const auto M = make_matrix(parse_ensemble(mm_ens), mm_m, mm_D, mm_seed, mm_eps);
      save_matrix(M, mm_out);
    } else if (*mver) {
      const auto M = load_matrix(mv_mat);
      bool ok = true;
      if (!mv_probes.empty()) {
        const auto r = verify_distortion(M, load_csv(mv_probes).points(), mv_eps);
        std::cout << "distortion " << r.to_json().dump() << '\n';
        ok = ok && r.pass;
      }
      if (mv_rip > 0) {
        const auto r = rip_check_bruteforce(M, mv_rip, mv_eps, false);
        std::cout << "rip pass=" << r.pass << " sigma2 in [" << r.sigma2_min << ", " << r.sigma2_max
                  << "] worst support";
        for (auto s : r.worst_support) std::cout << ' ' << s;
        std::cout << '\n';
        ok = ok && r.pass;
      }
      if (mv_set != 0) {
        if (mv_dict.empty()) throw std::invalid_argument("--assumption needs --dict");
        const auto dict = load_dictionary(mv_dict);
        std::optional<Vector> x;
        if (!mv_x.empty()) x = Vector(load_csv(mv_x).point(0).transpose());
        std::optional<PointCloud> samples;
        AssumptionOptions ao;
        if (!mv_manifold_csv.empty()) {
          samples = load_csv(mv_manifold_csv);
          ao.manifold = &*samples;
        }
        const auto r = verify_assumption_set(M, dict, x, mv_set, mv_eps, ao);
        std::cout << r.to_json().dump(2) << '\n';
        ok = ok && r.pass();
      }
      return ok ? 0 : 1;
    } else if (*mapply) {
      const auto M = load_matrix(ma_mat);
      std::ofstream f;
      write_csv_matrix(open_out(ma_out, f), M.apply_rows(load_csv(ma_in).points()));
    } else if (*rec) {
      const auto M = load_matrix(rc_mat);
      const auto dict = load_dictionary(rc_dict);
      const RowMatrix Y = load_csv(rc_meas).points();
      const Recoverer r(M, dict, RecoverOptions{rc_kdtree});
      std::optional<RowMatrix> X;
      if (!rc_orig.empty()) X = load_csv(rc_orig).points();
      if (!rc_cert.empty() && !X) throw std::invalid_argument("--certificates needs --originals");
      std::optional<ManifoldOracle> oracle;
      if (!rc_manifold.empty()) oracle = parse_manifold(rc_manifold);
      RowMatrix out(Y.rows(), dict.ambient_dim());
      std::ofstream cf;
      if (!rc_cert.empty()) {
        cf.open(rc_cert);
        if (!cf) throw std::runtime_error("cannot write " + rc_cert);
        cf << "point,j,k,compressed_residual,ill_conditioned,line3_lhs,line3_rhs,line4_lhs,line4_rhs,recovery_error,"
              "opt_error,theorem_residual,tube_lhs,tube_rhs\n";
      }
      for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        const Vector y = Y.row(i).transpose();
        const auto o = rc_scale == "auto" ? r.recover_auto(y) : r.recover(y, std::stoi(rc_scale));
        out.row(i) = o.reconstruction.transpose();
        if (cf.is_open()) {
          const Vector x = X->row(i).transpose();
          std::optional<Vector> xo;
          if (oracle) xo = oracle->nearest(x);
          const auto c = certify(x, M, dict, o, rc_eps, xo, CertifyOptions{rc_delta, 0});
          auto fd = [](double v) { return detail::format_double(v); };
          cf << i << ',' << o.chosen_scale << ',' << o.chosen_center << ',' << fd(o.compressed_residual) << ','
             << o.ill_conditioned << ',' << fd(c.line3_lhs) << ',' << fd(c.line3_rhs) << ',' << fd(c.line4_lhs) << ','
             << fd(c.line4_rhs) << ',' << fd(c.recovery_error) << ',' << (xo ? fd(c.opt_error) : "") << ','
             << (xo ? fd(c.theorem_residual) : "") << ',' << (xo ? fd(c.tube_lhs) : "") << ','
             << (xo ? fd(c.tube_rhs) : "") << '\n';
        }
      }
      std::ofstream f;
      write_csv_matrix(open_out(rc_out, f), out);
    } else if (*bnd) {
      std::ofstream f;
      std::ostream& os = open_out(b_out, f);
      os << "d,eps,J,delta,V,reach,D,C1,c,cover_bound,center_count_bound_J,m_nonuniform,m_uniform,"
            "m_nonuniform_precision,m_uniform_precision\n";
      for (int d : b_d)
        for (double e : b_eps)
          for (int J : b_J)
            for (double delta : b_delta) {
              BoundParams p{d, b_D, b_V, b_reach, e, J, b_C1, b_c};
              const std::string cover = delta < b_reach ? detail::format_double(cover_bound(p, delta)) : "";
              os << d << ',' << e << ',' << J << ',' << delta << ',' << b_V << ',' << b_reach << ',' << b_D << ','
                 << b_C1 << ',' << b_c << ',' << cover << ',' << detail::format_double(center_count_bound(p, J))
                 << ',' << m_nonuniform(p) << ',' << m_uniform(p) << ',' << m_nonuniform_precision(p, delta) << ','
                 << m_uniform_precision(p, delta) << '\n';
            }
    } else if (*erun) {
      ExperimentConfig cfg = er_cfg.empty() ? ExperimentConfig{} : load_config(er_cfg);
      if (er_seed) cfg.seed = *er_seed;
      if (!er_out.empty()) cfg.output_dir = er_out;
      if (!er_sigmas.empty()) cfg.sigmas = er_sigmas;
      if (!er_f.empty()) cfg.oversampling = er_f;
      if (!er_scales.empty()) cfg.scales = er_scales;
      if (er_draws) cfg.num_draws = *er_draws;
      if (er_n) cfg.dataset.n = *er_n;
      if (er_max_scale) cfg.gmra.max_scale = *er_max_scale;
      if (!er_ensemble.empty()) cfg.ensemble = parse_ensemble(er_ensemble);
      if (cfg.output_dir.empty()) throw std::invalid_argument("experiment run: an output directory is required");
      const auto res = run_experiment(cfg);
      std::cerr << "wrote " << res.rows.size() << " rows to " << cfg.output_dir << '\n';
    } else if (*eplot) {
      const auto res = load_summary(ep_dir);
      for (const auto& p : emit_plot(res, ep_out.empty() ? ep_dir : ep_out)) std::cout << p << '\n';
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ')';
    std::cerr << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
