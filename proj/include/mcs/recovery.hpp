#pragma once

// Two-step reconstruction from compressive measurements y = Mx:
//   k' = argmin_k ||y - M c_{j,k}||,
//   u' = argmin_u ||M Phi^T_{j,k'} u - y + M c_{j,k'}||,
//   A(y) = Phi^T_{j,k'} u' + c_{j,k'},
// together with the per-instance certificates that bound its error, and
// nearest-point oracles for the synthetic manifolds.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcs/error.hpp"
#include "mcs/geometry.hpp"
#include "mcs/gmra.hpp"
#include "mcs/kdtree.hpp"
#include "mcs/measurement.hpp"
#include "mcs/types.hpp"

namespace mcs {

inline constexpr double kSvdTolerance = 1e-10;

/// Minimum-norm least-squares solution of A u = b; singular values below
/// 1e-10 sigma_max count as zero. `rank` receives the numerical rank.
template <typename MA, typename VB>
inline Vector least_squares(const MA& A, const VB& b, Eigen::Index* rank = nullptr) {
  if (A.rows() < 1 || A.cols() < 1) throw std::invalid_argument("least_squares: A must be nonempty");
  require_dim(b.size(), A.rows(), "least_squares");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(A), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cut = s.size() > 0 ? kSvdTolerance * s[0] : 0.0;
  Vector coeff = svd.matrixU().transpose() * Vector(b);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cut && s[i] > 0.0) {
      coeff[i] /= s[i];
      ++r;
    } else {
      coeff[i] = 0.0;
    }
  }
  if (rank) *rank = r;
  return svd.matrixV() * coeff;
}

struct CertificateBundle {
  double epsilon_used = 0.0;
  // ||x - c_{k'}|| <= sqrt((1+eps)/(1-eps)) ||x - c_{k_j(x)}||
  double line3_lhs = 0.0, line3_rhs = 0.0;
  // ||P_{k'}(x) - A(Mx)|| <= 2/(1-eps) ||M(x - P_{k'}(x))||
  double line4_lhs = 0.0, line4_rhs = 0.0;
  Eigen::Index nearest_center = -1;  // k_j(x)
  bool has_x_opt = false;
  double opt_error = 0.0;            // ||x - x_opt||
  double recovery_error = 0.0;       // ||x - A(Mx)||
  double theorem_residual = 0.0;     // ||x - A(Mx)|| - 100.3 ||x - x_opt||
  double lemma17_lhs = 0.0, lemma17_rhs = 0.0;  // ||x - P_{k'}(x)|| vs 17 ||x - x_opt||
  double assump2_center_rhs = 0.0;   // center bound under the uniform assumptions
  double tube_lhs = 0.0, tube_rhs = 0.0;  // 2||e||_2 + 6/(5 sqrt d)||e||_1 vs max{||x - c_{J,k_J(x)}||, delta}

  bool line3_holds() const { return line3_lhs <= line3_rhs * (1.0 + 1e-12) + 1e-300; }
  bool line4_holds() const { return line4_lhs <= line4_rhs * (1.0 + 1e-12) + 1e-12 * (1.0 + line4_rhs); }
  bool tube_admissible() const { return tube_lhs <= tube_rhs; }
};

struct RecoveryOutcome {
  Vector reconstruction;
  int chosen_scale = 0;
  Eigen::Index chosen_center = -1;
  Vector coefficients;
  double compressed_residual = 0.0;
  Eigen::Index rank = 0;
  bool ill_conditioned = false;
  std::optional<CertificateBundle> certificates;
};

struct RecoverOptions {
  bool use_kdtree = false;  // k-d tree over compressed centers instead of a linear scan
};

/// Recovery against fixed (M, dictionary): caches the compressed centers and
/// a truncated pseudo-inverse of M Phi^T for every projector.
class Recoverer {
 public:
  Recoverer(const MeasurementMatrix& M, const MultiscaleDictionary& dict, RecoverOptions opt = {})
      : M_(&M), dict_(&dict), opt_(opt) {
    require_dim(M.cols(), dict.ambient_dim(), "Recoverer");
    for (int j = 0; j <= dict.max_scale(); ++j) {
      compressed_.push_back(M.apply_rows(dict.centers(j)));
      if (opt_.use_kdtree) trees_.emplace_back(compressed_.back());
      std::vector<Solver> sv;
      sv.reserve(static_cast<std::size_t>(dict.size(j)));
      for (const auto& p : dict.scale(j)) sv.push_back(make_solver(M.entries * p.basis.transpose()));
      solvers_.push_back(std::move(sv));
    }
  }

  const MeasurementMatrix& matrix() const { return *M_; }
  const MultiscaleDictionary& dictionary() const { return *dict_; }

  /// argmin_k ||y - M c_{j,k}||, lowest index on ties.
  template <typename V>
  Eigen::Index select_center(const V& y, int j) const {
    dict_->check_scale(j);
    require_dim(y.size(), M_->rows(), "recover");
    const auto js = static_cast<std::size_t>(j);
    return opt_.use_kdtree ? trees_[js].nearest(y).index : nearest_row(compressed_[js], y).index;
  }

  template <typename V>
  RecoveryOutcome recover(const V& y, int j) const {
    const Eigen::Index k = select_center(y, j);
    return solve(y, j, k);
  }

  /// Deepest scale whose selected projector is not a carried copy.
  template <typename V>
  RecoveryOutcome recover_auto(const V& y) const {
    for (int j = dict_->max_scale(); j > 0; --j) {
      const Eigen::Index k = select_center(y, j);
      if (!dict_->projector(j, k).carried) return solve(y, j, k);
    }
    return recover(y, 0);
  }

  /// Reconstructions of every row of `measurements` at scale j.
  RowMatrix recover_rows(const RowMatrix& measurements, int j) const {
    require_dim(measurements.cols(), M_->rows(), "recover_rows");
    RowMatrix out(measurements.rows(), dict_->ambient_dim());
    for (Eigen::Index i = 0; i < measurements.rows(); ++i) {
      const Vector y = measurements.row(i).transpose();
      out.row(i) = recover(y, j).reconstruction.transpose();
    }
    return out;
  }

 private:
  struct Solver {
    Eigen::MatrixXd pinv;  // d x m
    Eigen::Index rank = 0;
  };

  static Solver make_solver(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double cut = s.size() > 0 ? kSvdTolerance * s[0] : 0.0;
    Vector inv = Vector::Zero(s.size());
    Solver out;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] > cut && s[i] > 0.0) {
        inv[i] = 1.0 / s[i];
        ++out.rank;
      }
    }
    out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return out;
  }

  template <typename V>
  RecoveryOutcome solve(const V& y, int j, Eigen::Index k) const {
    const auto& p = dict_->projector(j, k);
    const auto& sv = solvers_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    const Vector b = y - compressed_[static_cast<std::size_t>(j)].row(k).transpose();
    RecoveryOutcome out;
    out.chosen_scale = j;
    out.chosen_center = k;
    out.coefficients = sv.pinv * b;
    out.rank = sv.rank;
    out.ill_conditioned = sv.rank < p.local_dim();
    out.reconstruction = p.basis.transpose() * out.coefficients + p.center;
    out.compressed_residual = (M_->entries * (p.basis.transpose() * out.coefficients) - b).norm();
    return out;
  }

  const MeasurementMatrix* M_;
  const MultiscaleDictionary* dict_;
  RecoverOptions opt_;
  std::vector<RowMatrix> compressed_;
  std::vector<KdTree> trees_;
  std::vector<std::vector<Solver>> solvers_;
};

/// Single-point recovery at scale j (computes only what scale j needs).
template <typename V>
inline RecoveryOutcome recover(const V& measurements, const MeasurementMatrix& M, const MultiscaleDictionary& dict,
                               int j) {
  require_dim(M.cols(), dict.ambient_dim(), "recover");
  require_dim(measurements.size(), M.rows(), "recover");
  dict.check_scale(j);
  const Vector y = measurements;
  const RowMatrix compressed = M.apply_rows(dict.centers(j));
  const Eigen::Index k = nearest_row(compressed, y).index;
  const auto& p = dict.projector(j, k);
  const Eigen::MatrixXd a = M.entries * p.basis.transpose();
  const Vector b = y - compressed.row(k).transpose();
  RecoveryOutcome out;
  out.chosen_scale = j;
  out.chosen_center = k;
  out.coefficients = least_squares(a, b, &out.rank);
  out.ill_conditioned = out.rank < p.local_dim();
  out.reconstruction = p.basis.transpose() * out.coefficients + p.center;
  out.compressed_residual = (a * out.coefficients - b).norm();
  return out;
}

// ---------------------------------------------------------------------------
// Certificates

struct CertifyOptions {
  /// Precision parameter of the uniform tube condition.
  double delta = 0.0;
  /// Sparsity for E_M; 0 selects the local dimension of the chosen projector.
  int em_sparsity = 0;
};

inline CertificateBundle certify(const Vector& x, const MeasurementMatrix& M, const MultiscaleDictionary& dict,
                                 const RecoveryOutcome& outcome, double eps,
                                 const std::optional<Vector>& x_opt = std::nullopt, const CertifyOptions& opt = {}) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("certify: eps must be in (0, 1/2)");
  require_dim(x.size(), dict.ambient_dim(), "certify");
  require_dim(M.cols(), dict.ambient_dim(), "certify");
  const int j = outcome.chosen_scale;
  const auto& p = dict.projector(j, outcome.chosen_center);
  CertificateBundle c;
  c.epsilon_used = eps;
  const double amp = std::sqrt((1.0 + eps) / (1.0 - eps));

  c.nearest_center = nearest_center(dict, j, x);
  const double dist_near = (x - dict.projector(j, c.nearest_center).center).norm();
  const double dist_chosen = (x - p.center).norm();
  c.line3_lhs = dist_chosen;
  c.line3_rhs = amp * dist_near;

  const Vector px = p.apply(x);
  c.line4_lhs = (px - outcome.reconstruction).norm();
  c.line4_rhs = 2.0 / (1.0 - eps) * M.apply(Vector(x - px)).norm();

  c.recovery_error = (x - outcome.reconstruction).norm();
  if (x_opt) {
    require_dim(x_opt->size(), x.size(), "certify");
    const Vector e = x - *x_opt;
    c.has_x_opt = true;
    c.opt_error = e.norm();
    c.theorem_residual = c.recovery_error - 100.3 * c.opt_error;
    c.lemma17_lhs = (x - px).norm();
    c.lemma17_rhs = 17.0 * c.opt_error;
    const int d = opt.em_sparsity > 0 ? opt.em_sparsity : static_cast<int>(p.local_dim());
    c.assump2_center_rhs = amp * dist_near + (1.0 + amp) * c.opt_error + std::sqrt(4.0 / (1.0 - eps)) * e_m_bound(e, eps, d);
    const int J = dict.max_scale();
    const double dJ = (x - dict.projector(J, nearest_center(dict, J, x)).center).norm();
    c.tube_lhs = 2.0 * e.norm() + 6.0 / (5.0 * std::sqrt(static_cast<double>(d))) * e.lpNorm<1>();
    c.tube_rhs = std::max(dJ, opt.delta);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Nearest-point oracles

inline Vector nearest_on_sphere(const Vector& x, double radius = 1.0) {
  const double n = x.norm();
  if (n == 0.0) throw std::invalid_argument("nearest_point_oracle: x = 0 has no unique nearest sphere point");
  return (radius / n) * x;
}

/// Nearest point of the swiss roll strip to q in R^3. The height decouples;
/// the angle comes from the best discrete minimum of a dense grid refined by
/// safeguarded Newton iterations on the derivative.
inline Vector nearest_on_swiss_roll(const Vector& q, const SwissRoll& roll = {}) {
  require_dim(q.size(), 3, "nearest_on_swiss_roll");
  const double h = std::clamp(q[1], 0.0, roll.height);
  const double q1 = q[0], q3 = q[2];
  auto g = [&](double t) {
    const double a = t * std::cos(t) - q1, b = t * std::sin(t) - q3;
    return a * a + b * b;
  };
  auto dg = [&](double t) {
    const double a = q1 * std::cos(t) + q3 * std::sin(t), b = -q1 * std::sin(t) + q3 * std::cos(t);
    return 2.0 * t - 2.0 * a - 2.0 * t * b;
  };
  auto d2g = [&](double t) {
    const double a = q1 * std::cos(t) + q3 * std::sin(t), b = -q1 * std::sin(t) + q3 * std::cos(t);
    return 2.0 - 4.0 * b + 2.0 * t * a;
  };
  constexpr int grid = 4096;
  const double lo = roll.t_min, hi = roll.t_max, step = (hi - lo) / grid;
  std::vector<double> vals(grid + 1);
  for (int i = 0; i <= grid; ++i) vals[static_cast<std::size_t>(i)] = g(lo + step * i);

  double best_t = lo, best = vals[0];
  if (vals[grid] < best) {
    best = vals[grid];
    best_t = hi;
  }
  for (int i = 1; i < grid; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (!(vals[u] <= vals[u - 1] && vals[u] <= vals[u + 1])) continue;
    // Bracket [a, b] around the discrete minimum; keep g' sign change when present.
    double a = lo + step * (i - 1), b = lo + step * (i + 1), t = lo + step * i;
    double fa = dg(a), fb = dg(b);
    for (int it = 0; it < 100; ++it) {
      const double f = dg(t);
      if (std::abs(f) < 1e-10) break;
      if (fa < 0.0 && fb > 0.0) {
        if (f < 0.0) {
          a = t;
          fa = f;
        } else {
          b = t;
          fb = f;
        }
      }
      const double curv = d2g(t);
      double next = curv > 0.0 ? t - f / curv : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - t) < 1e-15 * (1.0 + std::abs(t))) {
        t = next;
        break;
      }
      t = next;
    }
    t = std::clamp(t, lo, hi);
    const double v = g(t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return roll.embed(best_t, h);
}

/// Manifold descriptor for the nearest-point oracle.
class ManifoldOracle {
 public:
  enum class Kind { sphere, swiss_roll, dense_cloud };

  static ManifoldOracle sphere(int d, std::optional<IsometricEmbedding> embedding = std::nullopt) {
    if (d < 1) throw std::invalid_argument("ManifoldOracle::sphere: d must be >= 1");
    ManifoldOracle o(Kind::sphere);
    o.intrinsic_ = d;
    o.embedding_ = std::move(embedding);
    return o;
  }
  static ManifoldOracle swiss_roll(std::optional<IsometricEmbedding> embedding = std::nullopt, SwissRoll roll = {}) {
    ManifoldOracle o(Kind::swiss_roll);
    o.intrinsic_ = 2;
    o.embedding_ = std::move(embedding);
    o.roll_ = roll;
    return o;
  }
  static ManifoldOracle dense_cloud(const PointCloud& cloud) {
    ManifoldOracle o(Kind::dense_cloud);
    o.cloud_ = cloud.points();
    o.tree_ = KdTree(cloud.points());
    return o;
  }

  Kind kind() const { return kind_; }

  /// x_opt = argmin over the manifold of ||x - y||.
  Vector nearest(const Vector& x) const {
    switch (kind_) {
      case Kind::sphere: {
        if (!embedding_) {
          require_dim(x.size(), intrinsic_ + 1, "nearest_point_oracle");
          return nearest_on_sphere(x);
        }
        require_dim(x.size(), embedding_->basis.rows(), "nearest_point_oracle");
        return embedding_->apply(nearest_on_sphere(embedding_->restrict(x)));
      }
      case Kind::swiss_roll: {
        if (!embedding_) return nearest_on_swiss_roll(x, roll_);
        require_dim(x.size(), embedding_->basis.rows(), "nearest_point_oracle");
        return embedding_->apply(nearest_on_swiss_roll(embedding_->restrict(x), roll_));
      }
      case Kind::dense_cloud: {
        require_dim(x.size(), cloud_.cols(), "nearest_point_oracle");
        return cloud_.row(tree_.nearest(x).index).transpose();
      }
    }
    throw InvariantViolation("nearest_point_oracle: unknown manifold kind");
  }

 private:
  explicit ManifoldOracle(Kind k) : kind_(k) {}
  Kind kind_;
  int intrinsic_ = 0;
  std::optional<IsometricEmbedding> embedding_;
  SwissRoll roll_;
  RowMatrix cloud_;
  KdTree tree_;
};

inline Vector nearest_point_oracle(const Vector& x, const ManifoldOracle& manifold) { return manifold.nearest(x); }

}  // namespace mcs
