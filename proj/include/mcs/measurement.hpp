#pragma once

// Random measurement matrices and empirical checks of their embedding
// quality: pairwise distortion, brute-force RIP, and the two assumption sets
// a matrix must satisfy for recovery guarantees to apply.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcs/container.hpp"
#include "mcs/error.hpp"
#include "mcs/geometry.hpp"
#include "mcs/gmra.hpp"
#include "mcs/rng.hpp"
#include "mcs/types.hpp"

namespace mcs {

enum class Ensemble { gaussian, orthoprojection, custom };

inline std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::gaussian: return "gaussian";
    case Ensemble::orthoprojection: return "haar-orthoprojection";
    case Ensemble::custom: return "custom";
  }
  return "custom";
}

inline Ensemble parse_ensemble(const std::string& s) {
  if (s == "gaussian") return Ensemble::gaussian;
  if (s == "haar-orthoprojection" || s == "orthoprojection" || s == "haar") return Ensemble::orthoprojection;
  if (s == "custom") return Ensemble::custom;
  throw std::invalid_argument("unknown ensemble '" + s + "' (expected gaussian or haar-orthoprojection)");
}

struct MeasurementMatrix {
  RowMatrix entries;
  Ensemble ensemble = Ensemble::custom;
  std::uint64_t seed = 0;
  double target_epsilon = 0.3;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }

  template <typename V>
  Vector apply(const V& x) const {
    require_dim(x.size(), entries.cols(), "MeasurementMatrix::apply");
    return entries * x;
  }
  /// Measures every row of `points`; returns n x m.
  RowMatrix apply_rows(const RowMatrix& points) const {
    require_dim(points.cols(), entries.cols(), "MeasurementMatrix::apply_rows");
    return points * entries.transpose();
  }
};

inline void check_matrix_dims(Eigen::Index m, Eigen::Index D, const char* what) {
  if (m < 1 || D < 1) throw std::invalid_argument(std::string(what) + ": m and D must be >= 1");
}

/// i.i.d. N(0, 1/m) entries, filled row-major from one seeded stream.
inline MeasurementMatrix gaussian_matrix(Eigen::Index m, Eigen::Index D, std::uint64_t seed,
                                         double target_epsilon = 0.3) {
  check_matrix_dims(m, D, "gaussian_matrix");
  Rng rng(seed);
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  RowMatrix g(m, D);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = s * rng.normal();
  return MeasurementMatrix{std::move(g), Ensemble::gaussian, seed, target_epsilon};
}

/// First m rows of a Haar orthogonal matrix scaled by sqrt(D/m).
inline MeasurementMatrix orthoprojection_matrix(Eigen::Index m, Eigen::Index D, std::uint64_t seed,
                                                double target_epsilon = 0.3) {
  check_matrix_dims(m, D, "orthoprojection_matrix");
  if (m > D) throw std::invalid_argument("orthoprojection_matrix: m must be <= D");
  Rng rng(seed);
  // Columns of a D x m Gaussian, orthonormalised; the transposed Q gives m orthonormal rows.
  Eigen::MatrixXd g(D, m);
  for (Eigen::Index r = 0; r < D; ++r)
    for (Eigen::Index c = 0; c < m; ++c) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(D, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    if (qr.matrixQR()(c, c) < 0) q.col(c) *= -1.0;
  }
  RowMatrix rows = std::sqrt(static_cast<double>(D) / static_cast<double>(m)) * q.transpose();
  return MeasurementMatrix{std::move(rows), Ensemble::orthoprojection, seed, target_epsilon};
}

inline MeasurementMatrix make_matrix(Ensemble e, Eigen::Index m, Eigen::Index D, std::uint64_t seed,
                                     double target_epsilon = 0.3) {
  switch (e) {
    case Ensemble::gaussian: return gaussian_matrix(m, D, seed, target_epsilon);
    case Ensemble::orthoprojection: return orthoprojection_matrix(m, D, seed, target_epsilon);
    case Ensemble::custom: break;
  }
  throw std::invalid_argument("make_matrix: custom matrices cannot be drawn from a seed");
}

// ---------------------------------------------------------------------------
// Pairwise distortion

struct DistortionReport {
  double max_distortion = 0.0;  // max | ||Mu - Mv||^2 / ||u - v||^2 - 1 |
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_ratio = 0.0;
  Eigen::Index worst_a = -1, worst_b = -1;
  std::size_t pairs_checked = 0;
  std::size_t pairs_skipped = 0;  // coincident
  double eps = 0.0;
  bool pass = false;

  nlohmann::json to_json() const {
    return {{"max_distortion", max_distortion}, {"min_ratio", min_ratio},   {"max_ratio", max_ratio},
            {"worst_pair", {worst_a, worst_b}}, {"pairs_checked", pairs_checked},
            {"pairs_skipped", pairs_skipped},   {"eps", eps},               {"pass", pass}};
  }
};

/// Exact maximum over all pairs of rows of `probes`.
inline DistortionReport verify_distortion(const RowMatrix& M, const RowMatrix& probes, double eps) {
  require_dim(probes.cols(), M.cols(), "verify_distortion");
  if (probes.rows() < 2) throw std::invalid_argument("verify_distortion: need at least 2 probes");
  if (!(eps >= 0.0)) throw std::invalid_argument("verify_distortion: eps must be >= 0");
  DistortionReport rep;
  rep.eps = eps;
  const Eigen::Index n = probes.rows(), D = M.cols(), m = M.rows();
  // Compare squared lengths in whichever of R^m (images) or R^D (Gram form) is smaller.
  const bool gram_form = D < m;
  RowMatrix images;
  Eigen::MatrixXd gram;
  if (gram_form) {
    gram = M.transpose() * M;
  } else {
    images = probes * M.transpose();
  }
  Vector diff(D);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      diff = probes.row(a) - probes.row(b);
      const double base = diff.squaredNorm();
      if (base == 0.0) {
        ++rep.pairs_skipped;
        continue;
      }
      // Differences of images lose all accuracy for nearly coincident probes.
      const bool close = base < 1e-8 * (probes.row(a).squaredNorm() + probes.row(b).squaredNorm());
      const double img = gram_form ? diff.dot(gram * diff)
                         : close   ? (M * diff).squaredNorm()
                                   : (images.row(a) - images.row(b)).squaredNorm();
      const double ratio = img / base;
      const double dist = std::abs(ratio - 1.0);
      ++rep.pairs_checked;
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (dist > rep.max_distortion || rep.worst_a < 0) {
        rep.max_distortion = dist;
        rep.worst_a = a;
        rep.worst_b = b;
      }
    }
  }
  if (rep.pairs_checked == 0) throw std::invalid_argument("verify_distortion: all probes coincide");
  rep.pass = rep.max_distortion <= eps;
  return rep;
}

inline DistortionReport verify_distortion(const MeasurementMatrix& M, const RowMatrix& probes, double eps) {
  return verify_distortion(M.entries, probes, eps);
}

inline DistortionReport verify_distortion(const MeasurementMatrix& M, const std::vector<Vector>& probes, double eps) {
  RowMatrix p(static_cast<Eigen::Index>(probes.size()), M.cols());
  for (std::size_t i = 0; i < probes.size(); ++i) {
    require_dim(probes[i].size(), M.cols(), "verify_distortion");
    p.row(static_cast<Eigen::Index>(i)) = probes[i].transpose();
  }
  return verify_distortion(M.entries, p, eps);
}

// ---------------------------------------------------------------------------
// Restricted isometry, by enumeration of supports

struct SupportSpectrum {
  std::vector<Eigen::Index> support;
  double sigma2_min = 0.0;
  double sigma2_max = 0.0;
};

struct RipReport {
  bool pass = true;
  double eps = 0.0;
  int sparsity = 0;
  std::vector<Eigen::Index> worst_support;
  double worst_deviation = 0.0;  // max over supports of max(|s2_min - 1|, |s2_max - 1|)
  double sigma2_min = std::numeric_limits<double>::infinity();
  double sigma2_max = 0.0;
  std::vector<SupportSpectrum> supports;
};

inline double binomial(Eigen::Index n, Eigen::Index k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (Eigen::Index i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

/// Extreme squared singular values of every m x d column submatrix.
inline RipReport rip_check_bruteforce(const RowMatrix& M, int d, double eps, bool keep_supports = true) {
  const Eigen::Index D = M.cols();
  if (d < 1 || d > D) throw std::invalid_argument("rip_check_bruteforce: sparsity must be in [1, D]");
  if (!(eps >= 0.0)) throw std::invalid_argument("rip_check_bruteforce: eps must be >= 0");
  const double count = binomial(D, d);
  if (count > 1e6) {
    throw ResourceLimitError("rip_check_bruteforce: C(" + std::to_string(D) + "," + std::to_string(d) +
                             ") supports exceeds the 1e6 budget");
  }
  RipReport rep;
  rep.eps = eps;
  rep.sparsity = d;
  if (keep_supports) rep.supports.reserve(static_cast<std::size_t>(count));
  std::vector<Eigen::Index> s(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) s[static_cast<std::size_t>(i)] = i;
  Eigen::MatrixXd sub(M.rows(), d);
  while (true) {
    for (int c = 0; c < d; ++c) sub.col(c) = M.col(s[static_cast<std::size_t>(c)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub.transpose() * sub, Eigen::EigenvaluesOnly);
    const double lo = std::max(0.0, es.eigenvalues().minCoeff());
    const double hi = es.eigenvalues().maxCoeff();
    const double dev = std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
    rep.sigma2_min = std::min(rep.sigma2_min, lo);
    rep.sigma2_max = std::max(rep.sigma2_max, hi);
    if (dev > rep.worst_deviation || rep.worst_support.empty()) {
      rep.worst_deviation = dev;
      rep.worst_support = s;
    }
    if (keep_supports) rep.supports.push_back(SupportSpectrum{s, lo, hi});
    // Next d-subset in lexicographic order.
    int i = d - 1;
    while (i >= 0 && s[static_cast<std::size_t>(i)] == D - d + i) --i;
    if (i < 0) break;
    ++s[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < d; ++k) s[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k) - 1] + 1;
  }
  rep.pass = rep.sigma2_min >= 1.0 - eps && rep.sigma2_max <= 1.0 + eps;
  return rep;
}

inline RipReport rip_check_bruteforce(const MeasurementMatrix& M, int d, double eps, bool keep_supports = true) {
  return rip_check_bruteforce(M.entries, d, eps, keep_supports);
}

/// E_M(y) = sqrt(1 + eps) (||y||_2 + ||y||_1 / sqrt(d)), an upper bound on
/// ||My|| for any M with RIP(D, d, eps).
template <typename V>
inline double e_m_bound(const V& y, double eps, int d) {
  if (d < 1) throw std::invalid_argument("e_m_bound: d must be >= 1");
  if (!(eps >= 0.0)) throw std::invalid_argument("e_m_bound: eps must be >= 0");
  return std::sqrt(1.0 + eps) * (y.norm() + y.template lpNorm<1>() / std::sqrt(static_cast<double>(d)));
}

// ---------------------------------------------------------------------------
// Assumption sets

struct AssumptionItem {
  std::string name;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();  // >= 0 when satisfied
  std::size_t checked = 0;
  bool sampled = false;  // true when the item quantifies over an infinite set
  std::string detail;
};

struct AssumptionReport {
  int which = 1;
  double eps = 0.0;
  std::vector<AssumptionItem> items;

  bool pass() const {
    return std::all_of(items.begin(), items.end(), [](const AssumptionItem& i) { return i.pass; });
  }
  const AssumptionItem* find(const std::string& name) const {
    for (const auto& i : items)
      if (i.name == name) return &i;
    return nullptr;
  }
  nlohmann::json to_json() const {
    nlohmann::json it = nlohmann::json::array();
    for (const auto& i : items) {
      it.push_back({{"name", i.name},
                    {"pass", i.pass},
                    {"worst_margin", std::isinf(i.worst_margin) ? nlohmann::json(nullptr) : nlohmann::json(i.worst_margin)},
                    {"checked", i.checked},
                    {"sampled", i.sampled},
                    {"detail", i.detail}});
    }
    return {{"assumption_set", which}, {"eps", eps}, {"pass", pass()}, {"items", it}};
  }
};

struct AssumptionOptions {
  /// Manifold samples for set 2 (S_2 and item (d)).
  const PointCloud* manifold = nullptr;
  std::size_t sample_budget = 2000;
  std::size_t em_probes = 1000;
  /// Sparsity used by E_M; 0 selects the dictionary's maximum local dimension.
  int em_sparsity = 0;
  /// Also push an (eps/4)-net of each local unit ball through M (needs
  /// (12/eps)^d <= 1e7); the singular-value check is the decisive one.
  bool net_probes = true;
  std::uint64_t seed = 0;
};

/// S_1 = {Phi^T Phi (x - c)} u {x - c} u {0} over every projector.
inline RowMatrix assumption_set1_points(const MultiscaleDictionary& dict, const Vector& x) {
  require_dim(x.size(), dict.ambient_dim(), "assumption_set1_points");
  const Eigen::Index n = 2 * dict.total_projectors() + 1;
  RowMatrix s(n, dict.ambient_dim());
  Eigen::Index r = 0;
  for (int j = 0; j <= dict.max_scale(); ++j) {
    for (const auto& p : dict.scale(j)) {
      const Vector diff = x - p.center;
      s.row(r++) = (p.basis.transpose() * (p.basis * diff)).transpose();
      s.row(r++) = diff.transpose();
    }
  }
  s.row(r).setZero();
  return s;
}

namespace detail {

inline AssumptionItem distortion_item(const std::string& name, const RowMatrix& M, const RowMatrix& pts, double eps,
                                      bool sampled) {
  AssumptionItem item;
  item.name = name;
  item.sampled = sampled;
  const auto rep = verify_distortion(M, pts, eps);
  item.pass = rep.pass;
  item.worst_margin = eps - rep.max_distortion;
  item.checked = rep.pairs_checked;
  std::ostringstream os;
  os << "max distortion " << rep.max_distortion << " at pair (" << rep.worst_a << ", " << rep.worst_b << ")";
  item.detail = os.str();
  return item;
}

/// (1-eps)||z|| <= ||Mz|| <= (1+eps)||z|| on range(Phi^T), exactly via the
/// singular values of M Phi^T.
inline AssumptionItem subspace_item(const RowMatrix& M, const MultiscaleDictionary& dict, double eps) {
  AssumptionItem item;
  item.name = "subspace_isometry";
  for (int j = 0; j <= dict.max_scale(); ++j) {
    for (const auto& p : dict.scale(j)) {
      if (p.carried) continue;  // identical to its ancestor's check
      const Eigen::MatrixXd a = M * p.basis.transpose();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
      const auto& sv = svd.singularValues();
      const double smin = a.cols() > a.rows() ? 0.0 : sv.minCoeff();
      const double smax = sv.maxCoeff();
      const double margin = std::min(smin - (1.0 - eps), (1.0 + eps) - smax);
      ++item.checked;
      if (margin < item.worst_margin) {
        item.worst_margin = margin;
        std::ostringstream os;
        os << "projector (" << j << "," << p.index << "): singular values in [" << smin << ", " << smax << "]";
        item.detail = os.str();
      }
    }
  }
  item.pass = item.worst_margin >= 0.0;
  return item;
}

/// The net form: M restricted to Phi^T Q, Q an (eps/4)-net of the unit ball,
/// must have eps/2-distortion.
inline std::optional<AssumptionItem> subspace_net_item(const RowMatrix& M, const MultiscaleDictionary& dict,
                                                       double eps) {
  AssumptionItem item;
  item.name = "subspace_net";
  std::vector<std::vector<Vector>> nets(static_cast<std::size_t>(dict.ambient_dim()) + 1);
  for (int j = 0; j <= dict.max_scale(); ++j) {
    for (const auto& p : dict.scale(j)) {
      if (p.carried) continue;
      const auto d = static_cast<std::size_t>(p.local_dim());
      if (nets[d].empty()) {
        if (std::pow(12.0 / eps, static_cast<double>(d)) > 2e4) return std::nullopt;
        nets[d] = epsilon_net_ball(static_cast<int>(d), eps);
      }
      RowMatrix pts(static_cast<Eigen::Index>(nets[d].size()), dict.ambient_dim());
      for (std::size_t q = 0; q < nets[d].size(); ++q)
        pts.row(static_cast<Eigen::Index>(q)) = (p.basis.transpose() * nets[d][q]).transpose();
      const auto rep = verify_distortion(M, pts, eps / 2.0);
      item.checked += rep.pairs_checked;
      const double margin = eps / 2.0 - rep.max_distortion;
      if (margin < item.worst_margin) {
        item.worst_margin = margin;
        item.detail = "projector (" + std::to_string(j) + "," + std::to_string(p.index) + ")";
      }
    }
  }
  item.pass = item.worst_margin >= 0.0;
  return item;
}

inline std::vector<Eigen::Index> strided_subsample(Eigen::Index n, std::size_t budget) {
  const auto m = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::max<std::size_t>(1, budget)));
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < m; ++i) out.push_back(i * n / m);
  return out;
}

}  // namespace detail

inline AssumptionReport verify_assumption_set(const MeasurementMatrix& M, const MultiscaleDictionary& dict,
                                              const std::optional<Vector>& x, int which, double eps,
                                              const AssumptionOptions& opt = {}) {
  require_dim(M.cols(), dict.ambient_dim(), "verify_assumption_set");
  if (which != 1 && which != 2) throw std::invalid_argument("verify_assumption_set: which must be 1 or 2");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("verify_assumption_set: eps must be in (0, 1/2)");
  AssumptionReport rep;
  rep.which = which;
  rep.eps = eps;
  const RowMatrix& A = M.entries;

  if (which == 1) {
    if (!x) throw std::invalid_argument("verify_assumption_set: assumption set 1 needs the point x");
    rep.items.push_back(detail::distortion_item("distortion_S1", A, assumption_set1_points(dict, *x), eps, false));
    rep.items.push_back(detail::subspace_item(A, dict, eps));
    if (opt.net_probes) {
      if (auto net = detail::subspace_net_item(A, dict, eps)) rep.items.push_back(std::move(*net));
    }
    return rep;
  }

  if (opt.manifold == nullptr) throw std::invalid_argument("verify_assumption_set: assumption set 2 needs manifold samples");
  const PointCloud& mf = *opt.manifold;
  require_dim(mf.ambient_dim(), dict.ambient_dim(), "verify_assumption_set");
  const auto rows = detail::strided_subsample(mf.size(), opt.sample_budget);

  // (a) distortion on sampled manifold points together with all centers.
  {
    const Eigen::Index nc = dict.total_projectors();
    RowMatrix s2(static_cast<Eigen::Index>(rows.size()) + nc, dict.ambient_dim());
    Eigen::Index r = 0;
    for (auto i : rows) s2.row(r++) = mf.point(i);
    for (int j = 0; j <= dict.max_scale(); ++j)
      for (const auto& p : dict.scale(j)) s2.row(r++) = p.center.transpose();
    rep.items.push_back(detail::distortion_item("distortion_S2", A, s2, eps, true));
  }

  // (b) ||My|| <= E_M(y) on random Gaussian probes.
  {
    AssumptionItem item;
    item.name = "em_domination";
    item.sampled = true;
    const int d = opt.em_sparsity > 0 ? opt.em_sparsity : static_cast<int>(dict.max_local_dim(dict.max_scale()));
    Rng rng(derive_seed(opt.seed, 0xE11));
    Vector y(dict.ambient_dim());
    for (std::size_t t = 0; t < opt.em_probes; ++t) {
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
      const double bound = e_m_bound(y, eps, d);
      const double margin = (bound - (A * y).norm()) / bound;
      item.worst_margin = std::min(item.worst_margin, margin);
      ++item.checked;
    }
    item.pass = item.worst_margin >= 0.0;
    item.detail = "relative margin, sparsity " + std::to_string(d);
    rep.items.push_back(item);
  }

  // (c) subspace isometry.
  rep.items.push_back(detail::subspace_item(A, dict, eps));

  // (d) (1-eps)||y - P(y)|| - 2^-J <= ||M(y - P(y))|| <= (1+eps)||y - P(y)|| + 2^-J.
  {
    AssumptionItem item;
    item.name = "projection_residual";
    item.sampled = true;
    const double slack = std::ldexp(1.0, -dict.max_scale());
    for (auto i : rows) {
      const Vector y = mf.point(i).transpose();
      for (int j = 0; j <= dict.max_scale(); ++j) {
        for (const auto& p : dict.scale(j)) {
          const Vector r = y - p.apply(y);
          const double a = r.norm(), b = (A * r).norm();
          const double margin = std::min(b - ((1.0 - eps) * a - slack), ((1.0 + eps) * a + slack) - b);
          ++item.checked;
          if (margin < item.worst_margin) {
            item.worst_margin = margin;
            item.detail = "sample " + std::to_string(i) + ", projector (" + std::to_string(j) + "," + std::to_string(p.index) + ")";
          }
        }
      }
    }
    item.pass = item.worst_margin >= 0.0;
    rep.items.push_back(item);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr std::string_view kMatrixMagic = "MCSMATX1";

inline void save_matrix(const MeasurementMatrix& M, const std::string& path) {
  Container c;
  c.blob.assign(M.entries.data(), M.entries.data() + M.entries.size());
  c.manifest = {{"format_version", kFormatVersion},
                {"kind", "measurement_matrix"},
                {"rows", M.rows()},
                {"cols", M.cols()},
                {"ensemble", to_string(M.ensemble)},
                {"seed", M.seed},
                {"target_epsilon", M.target_epsilon},
                {"layout", "row-major float64 little-endian"},
                {"blob_bytes", 8 * c.blob.size()}};
  write_container(path, kMatrixMagic, c);
}

inline MeasurementMatrix load_matrix(const std::string& path) {
  const Container c = read_container(path, kMatrixMagic);
  try {
    const auto m = c.manifest.at("rows").get<Eigen::Index>();
    const auto D = c.manifest.at("cols").get<Eigen::Index>();
    if (m < 1 || D < 1 || static_cast<std::size_t>(m * D) != c.blob.size()) {
      throw ParseError(path + ": matrix shape does not match blob");
    }
    MeasurementMatrix M;
    M.entries = Eigen::Map<const RowMatrix>(c.blob.data(), m, D);
    if (!M.entries.allFinite()) throw ParseError(path + ": non-finite matrix entry");
    M.ensemble = parse_ensemble(c.manifest.at("ensemble").get<std::string>());
    M.seed = c.manifest.at("seed").get<std::uint64_t>();
    M.target_epsilon = c.manifest.at("target_epsilon").get<double>();
    return M;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": malformed manifest: " + e.what());
  }
}

}  // namespace mcs
