#pragma once

// Multiscale dictionary of affine projectors (geometric multi-resolution
// analysis): construction, structural validation, queries, persistence.
//
// Construction. A single farthest-point ordering of the cloud, started at
// row 0, yields nested nets: the scale-j seeds are the points inserted at a
// distance greater than r_j = r_0 2^-j, with r_0 the largest distance from
// row 0. Scale-0 is one cell holding every point; each scale-(j+1) cell is the
// set of members of a scale-j cell nearest to one of the scale-(j+1) seeds
// lying in it. Children with fewer than `min_cell_points` members are merged
// into their nearest sibling; a cell left with a single child is carried to
// the next scale unchanged (flagged `carried`). Each cell contributes the
// projector through its mean onto its top principal directions, and the
// parent of a projector is the nearest center of the previous scale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mcs/container.hpp"
#include "mcs/error.hpp"
#include "mcs/geometry.hpp"
#include "mcs/kdtree.hpp"
#include "mcs/stats.hpp"
#include "mcs/types.hpp"

namespace mcs {

/// x -> Phi^T Phi (x - c) + c, Phi a d x D matrix with orthonormal rows.
struct AffineProjector {
  Vector center;
  RowMatrix basis;
  int scale = 0;
  Eigen::Index index = 0;
  bool carried = false;  // identical copy of its parent cell's projector

  Eigen::Index local_dim() const { return basis.rows(); }
  Eigen::Index ambient_dim() const { return center.size(); }

  template <typename V>
  Vector apply(const V& x) const {
    require_dim(x.size(), center.size(), "AffineProjector::apply");
    const Vector diff = x - center;
    return basis.transpose() * (basis * diff) + center;
  }
};

class MultiscaleDictionary {
 public:
  MultiscaleDictionary() = default;

  /// Checks the structural invariants that every consumer relies on:
  /// nonempty nondecreasing scales (K_j <= K_{j+1}), consistent dimensions,
  /// orthonormal bases and a total parent map. Center separation is a
  /// property checked by validate_structure, not here.
  MultiscaleDictionary(std::vector<std::vector<AffineProjector>> scales,
                       std::vector<std::vector<Eigen::Index>> parents, double sep_constant, double root_radius,
                       nlohmann::json provenance = nlohmann::json::object())
      : scales_(std::move(scales)),
        parents_(std::move(parents)),
        sep_constant_(sep_constant),
        root_radius_(root_radius),
        provenance_(std::move(provenance)) {
    if (scales_.empty()) throw InvariantViolation("dictionary: no scales");
    if (!(sep_constant_ > 0.0)) throw InvariantViolation("dictionary: separation constant must be > 0");
    if (parents_.size() != scales_.size()) throw InvariantViolation("dictionary: parent map must have J+1 entries");
    const Eigen::Index D = scales_[0].empty() ? 0 : scales_[0][0].ambient_dim();
    if (D < 1) throw InvariantViolation("dictionary: empty scale 0");
    for (std::size_t j = 0; j < scales_.size(); ++j) {
      const auto& sc = scales_[j];
      if (sc.empty()) throw InvariantViolation("dictionary: empty scale " + std::to_string(j));
      if (j > 0 && sc.size() < scales_[j - 1].size()) {
        throw InvariantViolation("dictionary: K_" + std::to_string(j) + " < K_" + std::to_string(j - 1));
      }
      if (j == 0 && !parents_[0].empty()) throw InvariantViolation("dictionary: scale 0 has no parents");
      if (j > 0 && parents_[j].size() != sc.size()) {
        throw InvariantViolation("dictionary: parent map not total on scale " + std::to_string(j));
      }
      for (std::size_t k = 0; k < sc.size(); ++k) {
        const auto& p = sc[k];
        if (p.ambient_dim() != D || p.basis.cols() != D) {
          throw InvariantViolation("dictionary: dimension mismatch at (" + std::to_string(j) + "," + std::to_string(k) + ")");
        }
        if (p.local_dim() < 1 || p.local_dim() > D) {
          throw InvariantViolation("dictionary: bad local dimension at (" + std::to_string(j) + "," + std::to_string(k) + ")");
        }
        const RowMatrix gram = p.basis * p.basis.transpose();
        const double err = (gram - RowMatrix::Identity(p.local_dim(), p.local_dim())).cwiseAbs().maxCoeff();
        if (!(err < 1e-10)) {
          throw InvariantViolation("dictionary: basis rows not orthonormal at (" + std::to_string(j) + "," +
                                   std::to_string(k) + ")");
        }
        if (!p.center.allFinite() || !p.basis.allFinite()) {
          throw InvariantViolation("dictionary: non-finite projector at (" + std::to_string(j) + "," + std::to_string(k) + ")");
        }
        if (j > 0) {
          const auto par = parents_[j][k];
          if (par < 0 || par >= static_cast<Eigen::Index>(scales_[j - 1].size())) {
            throw InvariantViolation("dictionary: parent out of range at (" + std::to_string(j) + "," + std::to_string(k) + ")");
          }
        }
      }
      RowMatrix c(static_cast<Eigen::Index>(sc.size()), D);
      for (std::size_t k = 0; k < sc.size(); ++k) c.row(static_cast<Eigen::Index>(k)) = sc[k].center.transpose();
      centers_.push_back(std::move(c));
    }
  }

  int max_scale() const { return static_cast<int>(scales_.size()) - 1; }
  int num_scales() const { return static_cast<int>(scales_.size()); }
  Eigen::Index ambient_dim() const { return centers_.front().cols(); }
  Eigen::Index size(int j) const { return static_cast<Eigen::Index>(scale(j).size()); }

  const std::vector<AffineProjector>& scale(int j) const {
    check_scale(j);
    return scales_[static_cast<std::size_t>(j)];
  }
  const AffineProjector& projector(int j, Eigen::Index k) const { return scale(j).at(static_cast<std::size_t>(k)); }
  /// K_j x D matrix of scale-j centers.
  const RowMatrix& centers(int j) const {
    check_scale(j);
    return centers_[static_cast<std::size_t>(j)];
  }
  Eigen::Index parent(int j, Eigen::Index k) const {
    if (j < 1) throw std::invalid_argument("parent: scale 0 projectors are roots");
    check_scale(j);
    return parents_[static_cast<std::size_t>(j)].at(static_cast<std::size_t>(k));
  }
  const std::vector<std::vector<Eigen::Index>>& parents() const { return parents_; }
  const std::vector<std::vector<AffineProjector>>& scales() const { return scales_; }

  /// d_j = max_k dim range(P_{j,k}).
  Eigen::Index max_local_dim(int j) const {
    Eigen::Index d = 0;
    for (const auto& p : scale(j)) d = std::max(d, p.local_dim());
    return d;
  }
  Eigen::Index total_projectors() const {
    Eigen::Index n = 0;
    for (const auto& s : scales_) n += static_cast<Eigen::Index>(s.size());
    return n;
  }

  double sep_constant() const { return sep_constant_; }
  double root_radius() const { return root_radius_; }
  const nlohmann::json& provenance() const { return provenance_; }

  void check_scale(int j) const {
    if (j < 0 || j >= static_cast<int>(scales_.size())) {
      throw std::invalid_argument("scale " + std::to_string(j) + " outside [0, " + std::to_string(max_scale()) + "]");
    }
  }

 private:
  std::vector<std::vector<AffineProjector>> scales_;
  std::vector<std::vector<Eigen::Index>> parents_;
  std::vector<RowMatrix> centers_;
  double sep_constant_ = 1.0;
  double root_radius_ = 0.0;
  nlohmann::json provenance_;
};

// ---------------------------------------------------------------------------
// Construction

struct BuildOptions {
  int max_scale = 4;
  /// Fixed local dimension d; when empty the dimension is chosen per cell as
  /// the smallest one capturing `energy_threshold` of the spectral energy.
  std::optional<int> local_dim;
  int max_local_dim = 16;
  double energy_threshold = 0.95;
  /// Requested C_1; 0 selects the largest constant the centers admit.
  double sep_constant_hint = 0.0;
  /// 0 selects d + 1 (fixed) or max_local_dim + 1 (adaptive).
  int min_cell_points = 0;
  /// Treat max_scale as a cap and stop at the first scale where no cell
  /// splits any more (that scale is kept, so J is the depth of the tree).
  bool auto_depth = false;
};

namespace detail {

struct Cell {
  std::vector<Eigen::Index> members;
  Eigen::Index seed = 0;
  bool carried = false;
};

inline AffineProjector fit_projector(const RowMatrix& pts, const std::vector<Eigen::Index>& members,
                                     const BuildOptions& opt) {
  const Eigen::Index D = pts.cols();
  const auto n = static_cast<Eigen::Index>(members.size());
  AffineProjector p;
  p.center = Vector::Zero(D);
  for (auto i : members) p.center += pts.row(i).transpose();
  p.center /= static_cast<double>(n);

  RowMatrix x(n, D);
  for (Eigen::Index r = 0; r < n; ++r) x.row(r) = pts.row(members[static_cast<std::size_t>(r)]) - p.center.transpose();

  // Principal directions in decreasing order of energy.
  Eigen::MatrixXd dirs;
  Vector energy;
  if (n >= D) {
    const Eigen::MatrixXd cov = x.transpose() * x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    dirs = es.eigenvectors().rowwise().reverse();
    energy = es.eigenvalues().reverse().cwiseMax(0.0);
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeFullV);
    dirs = svd.matrixV();
    energy = Vector::Zero(D);
    energy.head(svd.singularValues().size()) = svd.singularValues().array().square().matrix();
  }

  Eigen::Index d = 0;
  if (opt.local_dim) {
    d = *opt.local_dim;
  } else {
    const double total = energy.sum();
    const Eigen::Index cap = std::min<Eigen::Index>({static_cast<Eigen::Index>(opt.max_local_dim), D, std::max<Eigen::Index>(1, n - 1)});
    d = cap;
    if (total > 0.0) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < cap; ++i) {
        acc += energy[i];
        if (acc >= opt.energy_threshold * total) {
          d = i + 1;
          break;
        }
      }
    } else {
      d = 1;
    }
  }
  p.basis = dirs.leftCols(d).transpose();
  return p;
}

}  // namespace detail

inline MultiscaleDictionary build_dictionary(const PointCloud& cloud, const BuildOptions& opt) {
  const RowMatrix& pts = cloud.points();
  const Eigen::Index n = pts.rows(), D = pts.cols();
  if (opt.max_scale < 0) throw std::invalid_argument("build_dictionary: max_scale must be >= 0");
  if (opt.local_dim && (*opt.local_dim < 1 || *opt.local_dim > D)) {
    throw std::invalid_argument("build_dictionary: local_dim must be in [1, D]");
  }
  if (!opt.local_dim && opt.max_local_dim < 1) throw std::invalid_argument("build_dictionary: max_local_dim must be >= 1");
  if (!(opt.energy_threshold > 0.0 && opt.energy_threshold <= 1.0)) {
    throw std::invalid_argument("build_dictionary: energy_threshold must be in (0, 1]");
  }
  const int d_req = opt.local_dim ? *opt.local_dim : std::min<int>(opt.max_local_dim, static_cast<int>(D));
  if (n < d_req + 1) throw std::invalid_argument("build_dictionary: need at least d + 1 points");
  const int min_pts = std::max(opt.min_cell_points, d_req + 1);
  int J = opt.max_scale;

  double r0 = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) r0 = std::max(r0, squared_distance(pts.row(i), pts.row(0)));
  r0 = std::sqrt(r0);
  if (!(r0 > 0.0)) throw std::invalid_argument("build_dictionary: all points coincide");
  auto radius = [&](int j) { return std::ldexp(r0, -j); };

  // seed_level[i] = first scale at which point i is a net seed.
  const auto fps = farthest_point_order(pts, radius(J));
  std::vector<int> seed_level(static_cast<std::size_t>(n), std::numeric_limits<int>::max());
  for (std::size_t s = 0; s < fps.order.size(); ++s) {
    int level = 0;
    while (level <= J && !(fps.insertion_radius[s] > radius(level))) ++level;
    if (level <= J) seed_level[static_cast<std::size_t>(fps.order[s])] = level;
  }
  seed_level[0] = 0;

  std::vector<std::vector<AffineProjector>> scales(static_cast<std::size_t>(J) + 1);
  std::vector<std::vector<Eigen::Index>> cell_parent(static_cast<std::size_t>(J) + 1);
  std::vector<Eigen::Index> carried_count(static_cast<std::size_t>(J) + 1, 0);

  std::vector<detail::Cell> cells(1);
  cells[0].members.resize(static_cast<std::size_t>(n));
  std::iota(cells[0].members.begin(), cells[0].members.end(), Eigen::Index{0});
  cells[0].seed = 0;

  for (int j = 0; j <= J; ++j) {
    if (j > 0) {
      std::vector<detail::Cell> next;
      std::vector<Eigen::Index> next_parent;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        const AffineProjector& parent_proj = scales[static_cast<std::size_t>(j) - 1][c];
        std::vector<Eigen::Index> seeds;
        for (auto i : cell.members) {
          if (seed_level[static_cast<std::size_t>(i)] <= j) seeds.push_back(i);
        }
        std::vector<std::vector<Eigen::Index>> groups;
        while (true) {
          groups.assign(seeds.size(), {});
          for (auto i : cell.members) {
            std::size_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < seeds.size(); ++s) {
              const double d2 = squared_distance(pts.row(i), pts.row(seeds[s]));
              if (d2 < best_d2) {
                best_d2 = d2;
                best = s;
              }
            }
            groups[best].push_back(i);
          }
          if (seeds.size() <= 1) break;
          std::size_t smallest = 0;
          for (std::size_t s = 1; s < seeds.size(); ++s) {
            if (groups[s].size() < groups[smallest].size()) smallest = s;
          }
          if (static_cast<int>(groups[smallest].size()) >= min_pts) break;
          seeds.erase(seeds.begin() + static_cast<std::ptrdiff_t>(smallest));
        }
        if (seeds.size() == 1) {
          next.push_back(detail::Cell{cell.members, cell.seed, true});
          next_parent.push_back(static_cast<Eigen::Index>(c));
          (void)parent_proj;
        } else {
          for (std::size_t s = 0; s < seeds.size(); ++s) {
            next.push_back(detail::Cell{std::move(groups[s]), seeds[s], false});
            next_parent.push_back(static_cast<Eigen::Index>(c));
          }
        }
      }
      cells = std::move(next);
      cell_parent[static_cast<std::size_t>(j)] = std::move(next_parent);
    }
    if (opt.auto_depth && j > 0 &&
        std::all_of(cells.begin(), cells.end(), [](const detail::Cell& c) { return c.carried; })) {
      J = j;
      scales.resize(static_cast<std::size_t>(J) + 1);
      cell_parent.resize(static_cast<std::size_t>(J) + 1);
      carried_count.resize(static_cast<std::size_t>(J) + 1);
    }
    auto& sc = scales[static_cast<std::size_t>(j)];
    sc.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      AffineProjector p;
      if (cells[c].carried) {
        p = scales[static_cast<std::size_t>(j) - 1][static_cast<std::size_t>(cell_parent[static_cast<std::size_t>(j)][c])];
        p.carried = true;
        ++carried_count[static_cast<std::size_t>(j)];
      } else {
        p = detail::fit_projector(pts, cells[c].members, opt);
      }
      p.scale = j;
      p.index = static_cast<Eigen::Index>(c);
      sc.push_back(std::move(p));
    }
    if (j == J) break;
  }

  // Parents: nearest center one scale up. Separation: nearest other center.
  std::vector<std::vector<Eigen::Index>> parents(static_cast<std::size_t>(J) + 1);
  double c1_admissible = std::numeric_limits<double>::infinity();
  std::vector<RowMatrix> centers;
  for (int j = 0; j <= J; ++j) {
    const auto& sc = scales[static_cast<std::size_t>(j)];
    RowMatrix c(static_cast<Eigen::Index>(sc.size()), D);
    for (std::size_t k = 0; k < sc.size(); ++k) c.row(static_cast<Eigen::Index>(k)) = sc[k].center.transpose();
    centers.push_back(std::move(c));
  }
  for (int j = 0; j <= J; ++j) {
    const RowMatrix& c = centers[static_cast<std::size_t>(j)];
    const KdTree tree(c);
    double min_sep2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < c.rows(); ++k) min_sep2 = std::min(min_sep2, tree.nearest(c.row(k), k).squared_distance);
    if (c.rows() > 1) c1_admissible = std::min(c1_admissible, std::sqrt(min_sep2) * std::ldexp(1.0, j));
    if (j > 0) {
      const KdTree up(centers[static_cast<std::size_t>(j) - 1]);
      auto& par = parents[static_cast<std::size_t>(j)];
      par.resize(static_cast<std::size_t>(c.rows()));
      for (Eigen::Index k = 0; k < c.rows(); ++k) par[static_cast<std::size_t>(k)] = up.nearest(c.row(k)).index;
    }
  }
  if (c1_admissible == 0.0) throw InvariantViolation("build_dictionary: two cells share the same mean");
  double c1 = std::isinf(c1_admissible) ? r0 : 0.999 * c1_admissible;
  if (opt.sep_constant_hint > 0.0) c1 = std::min(c1, opt.sep_constant_hint);

  nlohmann::json prov = {
      {"builder", "farthest-point nets, nested voronoi cells, local pca"},
      {"n_points", n},
      {"ambient_dim", D},
      {"max_scale", J},
      {"max_scale_cap", opt.max_scale},
      {"auto_depth", opt.auto_depth},
      {"local_dim", opt.local_dim ? nlohmann::json(*opt.local_dim) : nlohmann::json("adaptive")},
      {"max_local_dim", opt.max_local_dim},
      {"energy_threshold", opt.energy_threshold},
      {"min_cell_points", min_pts},
      {"sep_constant_hint", opt.sep_constant_hint},
      {"sep_constant_admissible", std::isinf(c1_admissible) ? nlohmann::json(nullptr) : nlohmann::json(c1_admissible)},
      {"root_radius", r0},
      {"carried_per_scale", carried_count},
      {"source_hash", hash_string(content_hash(pts))},
  };
  if (cloud.label()) prov["source_label"] = *cloud.label();
  return MultiscaleDictionary(std::move(scales), std::move(parents), c1, r0, std::move(prov));
}

// ---------------------------------------------------------------------------
// Queries

/// k_j(x) = argmin_k ||x - c_{j,k}||, lowest index on ties.
template <typename V>
inline Eigen::Index nearest_center(const MultiscaleDictionary& dict, int j, const V& x) {
  const RowMatrix& c = dict.centers(j);
  require_dim(x.size(), c.cols(), "nearest_center");
  if (c.rows() == 0) throw InvariantViolation("nearest_center: empty scale");
  return nearest_row(c, x).index;
}

template <typename V>
inline Vector apply_projector(const AffineProjector& p, const V& x) {
  return p.apply(x);
}

/// P_{j, k_j(x)}(x).
template <typename V>
inline Vector project_to_scale(const MultiscaleDictionary& dict, int j, const V& x) {
  return dict.projector(j, nearest_center(dict, j, x)).apply(x);
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationOptions {
  /// Cloud points used for the factor-16 / factor-8 neighbourhood checks
  /// (evenly strided subsample; all points are used for the others).
  Eigen::Index max_neighbourhood_points = 2000;
  /// Inclusive scale range for the error-decay fit; defaults to the mid
  /// scales [1, J - 1] (all scales when J < 3).
  std::optional<std::pair<int, int>> fit_scales;
  double refinement_slack = 0.05;
  /// Distance from a point to the manifold, for the tube condition. When
  /// empty the distance to the nearest cloud point stands in for it, which
  /// overestimates by up to the sampling gap.
  std::function<double(const Vector&)> manifold_distance;
};

struct ScaleReport {
  int scale = 0;
  Eigen::Index K = 0;
  Eigen::Index carried = 0;
  double min_separation = std::numeric_limits<double>::infinity();
  double separation_margin = std::numeric_limits<double>::infinity();  // min_sep - C_1 2^-j
  Eigen::Index worst_pair_a = -1, worst_pair_b = -1;
  double parent_worst_ratio = 0.0;  // max ||c - c_p|| / min_{k' != p} ||c - c_k'||
  double tube_worst = 0.0;          // max distance from a center to the cloud
  double tube_radius = 0.0;         // C_1 2^{-j-2}
  bool tube_ok = true;
  double mean_error = 0.0;          // mean ||x - P_{j,k_j(x)}(x)||
  double max_error = 0.0;
  double c_estimate = 0.0;          // max error * 2^{2j}
  double ctilde16_estimate = 0.0;   // factor-16 neighbourhood, max error * 2^j
  double ctilde8_estimate = 0.0;    // factor-8 neighbourhood
  double max_cell_radius = 0.0;     // max distance from a point to its nearest center
};

struct StructureReport {
  bool k_monotone = true;
  bool separation_ok = true;
  bool parent_ok = true;       // C_2 = 1
  bool refinement_ok = true;   // mean error nonincreasing within slack
  bool orthonormal_ok = true;
  std::optional<int> tube_j0;  // smallest j0 with the tube condition on all j > j0; -1 if every scale holds
  double worst_separation_margin = std::numeric_limits<double>::infinity();
  double worst_parent_ratio = 0.0;
  LineFit decay;               // log2(mean error) against j
  std::vector<ScaleReport> scales;
  std::vector<std::string> failures;

  bool all_passed() const { return k_monotone && separation_ok && parent_ok && orthonormal_ok; }

  nlohmann::json to_json() const {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& r : scales) {
      s.push_back({{"scale", r.scale},
                   {"K", r.K},
                   {"carried", r.carried},
                   {"min_separation", std::isinf(r.min_separation) ? nlohmann::json(nullptr) : nlohmann::json(r.min_separation)},
                   {"separation_margin", std::isinf(r.separation_margin) ? nlohmann::json(nullptr) : nlohmann::json(r.separation_margin)},
                   {"parent_worst_ratio", r.parent_worst_ratio},
                   {"tube_worst", r.tube_worst},
                   {"tube_radius", r.tube_radius},
                   {"tube_ok", r.tube_ok},
                   {"mean_error", r.mean_error},
                   {"max_error", r.max_error},
                   {"c_estimate", r.c_estimate},
                   {"ctilde16_estimate", r.ctilde16_estimate},
                   {"ctilde8_estimate", r.ctilde8_estimate},
                   {"max_cell_radius", r.max_cell_radius}});
    }
    return {{"k_monotone", k_monotone},
            {"separation_ok", separation_ok},
            {"parent_ok", parent_ok},
            {"orthonormal_ok", orthonormal_ok},
            {"refinement_ok", refinement_ok},
            {"tube_j0", tube_j0 ? nlohmann::json(*tube_j0) : nlohmann::json(nullptr)},
            {"worst_separation_margin",
             std::isinf(worst_separation_margin) ? nlohmann::json(nullptr) : nlohmann::json(worst_separation_margin)},
            {"worst_parent_ratio", worst_parent_ratio},
            {"decay_slope", decay.slope},
            {"decay_slope_ci95", {decay.slope_ci_low, decay.slope_ci_high}},
            {"scales", s},
            {"failures", failures}};
  }
};

inline StructureReport validate_structure(const MultiscaleDictionary& dict, const PointCloud& cloud,
                                          const ValidationOptions& opt = {}) {
  require_dim(cloud.ambient_dim(), dict.ambient_dim(), "validate_structure");
  StructureReport rep;
  const int J = dict.max_scale();
  const double c1 = dict.sep_constant();
  const RowMatrix& pts = cloud.points();
  const Eigen::Index n = pts.rows();
  const KdTree cloud_tree(pts);

  std::vector<Eigen::Index> probe_rows;
  {
    const Eigen::Index m = std::min(n, std::max<Eigen::Index>(1, opt.max_neighbourhood_points));
    for (Eigen::Index i = 0; i < m; ++i) probe_rows.push_back(i * n / m);
  }

  std::vector<bool> tube_ok(static_cast<std::size_t>(J) + 1, true);
  for (int j = 0; j <= J; ++j) {
    ScaleReport sr;
    sr.scale = j;
    const RowMatrix& c = dict.centers(j);
    const auto& sc = dict.scale(j);
    sr.K = c.rows();
    for (const auto& p : sc) sr.carried += p.carried ? 1 : 0;
    const double sep_needed = c1 * std::ldexp(1.0, -j);

    if (j > 0 && dict.size(j) < dict.size(j - 1)) {
      rep.k_monotone = false;
      rep.failures.push_back("K_" + std::to_string(j) + " < K_" + std::to_string(j - 1));
    }

    // Separation, exhaustive over pairs.
    for (Eigen::Index a = 0; a < c.rows(); ++a) {
      for (Eigen::Index b = a + 1; b < c.rows(); ++b) {
        const double dist = std::sqrt(squared_distance(c.row(a), c.row(b)));
        if (dist < sr.min_separation) {
          sr.min_separation = dist;
          sr.worst_pair_a = a;
          sr.worst_pair_b = b;
        }
      }
    }
    if (c.rows() > 1) {
      sr.separation_margin = sr.min_separation - sep_needed;
      rep.worst_separation_margin = std::min(rep.worst_separation_margin, sr.separation_margin);
      if (!(sr.min_separation > sep_needed)) {
        rep.separation_ok = false;
        std::ostringstream os;
        os << "scale " << j << ": centers " << sr.worst_pair_a << " and " << sr.worst_pair_b << " are "
           << sr.min_separation << " apart (need > " << sep_needed << ")";
        rep.failures.push_back(os.str());
      }
    }

    // Orthonormality.
    for (const auto& p : sc) {
      const RowMatrix gram = p.basis * p.basis.transpose();
      if (!((gram - RowMatrix::Identity(p.local_dim(), p.local_dim())).cwiseAbs().maxCoeff() < 1e-10)) {
        rep.orthonormal_ok = false;
        rep.failures.push_back("basis not orthonormal at (" + std::to_string(j) + "," + std::to_string(p.index) + ")");
      }
    }

    // Parents, C_2 = 1.
    if (j > 0) {
      const RowMatrix& up = dict.centers(j - 1);
      for (Eigen::Index k = 0; k < c.rows(); ++k) {
        const Eigen::Index par = dict.parent(j, k);
        const double dp = std::sqrt(squared_distance(c.row(k), up.row(par)));
        const auto other = nearest_row(up, c.row(k), par);
        const double ratio = other.index < 0 ? 0.0 : (dp == 0.0 ? 0.0 : dp / std::sqrt(other.squared_distance));
        sr.parent_worst_ratio = std::max(sr.parent_worst_ratio, ratio);
      }
      rep.worst_parent_ratio = std::max(rep.worst_parent_ratio, sr.parent_worst_ratio);
      if (!(sr.parent_worst_ratio < 1.0)) {
        rep.parent_ok = false;
        rep.failures.push_back("scale " + std::to_string(j) + ": parent is not the strictly nearest coarser center");
      }
    }

    // Tube condition.
    sr.tube_radius = c1 * std::ldexp(1.0, -j - 2);
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
      const double dist = opt.manifold_distance ? opt.manifold_distance(c.row(k).transpose())
                                                : std::sqrt(cloud_tree.nearest(c.row(k)).squared_distance);
      sr.tube_worst = std::max(sr.tube_worst, dist);
    }
    sr.tube_ok = sr.tube_worst < sr.tube_radius;
    tube_ok[static_cast<std::size_t>(j)] = sr.tube_ok;

    // Approximation error at the nearest center.
    const KdTree centers_tree(c);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto hit = centers_tree.nearest(pts.row(i));
      const double e = (pts.row(i).transpose() - sc[static_cast<std::size_t>(hit.index)].apply(pts.row(i).transpose())).norm();
      sum += e;
      sr.max_error = std::max(sr.max_error, e);
      sr.max_cell_radius = std::max(sr.max_cell_radius, std::sqrt(hit.squared_distance));
    }
    sr.mean_error = sum / static_cast<double>(n);
    sr.c_estimate = sr.max_error * std::ldexp(1.0, 2 * j);

    // Neighbourhood checks: projectors whose centers are within factor x max{||x - c_{k_j}||, C_1 2^{-j-1}}.
    for (auto i : probe_rows) {
      const Vector x = pts.row(i).transpose();
      const double dn = std::sqrt(centers_tree.nearest(x).squared_distance);
      const double base = std::max(dn, c1 * std::ldexp(1.0, -j - 1));
      for (Eigen::Index k = 0; k < c.rows(); ++k) {
        const double dk = std::sqrt(squared_distance(c.row(k), x));
        if (dk > 16.0 * base) continue;
        const double e = (x - sc[static_cast<std::size_t>(k)].apply(x)).norm() * std::ldexp(1.0, j);
        sr.ctilde16_estimate = std::max(sr.ctilde16_estimate, e);
        if (dk <= 8.0 * base) sr.ctilde8_estimate = std::max(sr.ctilde8_estimate, e);
      }
    }
    rep.scales.push_back(sr);
  }

  for (int j = 0; j < J; ++j) {
    const double a = rep.scales[static_cast<std::size_t>(j)].mean_error;
    const double b = rep.scales[static_cast<std::size_t>(j) + 1].mean_error;
    if (b > a * (1.0 + opt.refinement_slack)) rep.refinement_ok = false;
  }

  // j0: smallest value such that every scale above it satisfies the tube condition.
  {
    int j0 = J;
    while (j0 >= 0 && tube_ok[static_cast<std::size_t>(j0)]) --j0;
    rep.tube_j0 = j0;
  }

  // Decay exponent of the mean error.
  {
    int lo = J < 3 ? 0 : 1, hi = J < 3 ? J : J - 1;
    if (opt.fit_scales) {
      lo = std::max(0, opt.fit_scales->first);
      hi = std::min(J, opt.fit_scales->second);
    }
    std::vector<double> xs, ys;
    for (int j = lo; j <= hi; ++j) {
      const double e = rep.scales[static_cast<std::size_t>(j)].mean_error;
      if (e > 0.0) {
        xs.push_back(j);
        ys.push_back(std::log2(e));
      }
    }
    if (xs.size() >= 2) rep.decay = fit_line(xs, ys);
  }
  return rep;
}

/// Mean ||x - P_{j,k_j(x)}(x)|| over the cloud, per scale.
inline std::vector<double> mean_approximation_error(const MultiscaleDictionary& dict, const PointCloud& cloud) {
  std::vector<double> out;
  for (int j = 0; j <= dict.max_scale(); ++j) {
    const KdTree tree(dict.centers(j));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
      const Vector x = cloud.point(i).transpose();
      sum += (x - dict.projector(j, tree.nearest(x).index).apply(x)).norm();
    }
    out.push_back(sum / static_cast<double>(cloud.size()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

inline constexpr std::string_view kDictionaryMagic = "MCSDICT1";

inline void save_dictionary(const MultiscaleDictionary& dict, const std::string& path) {
  const Eigen::Index D = dict.ambient_dim();
  Container c;
  std::vector<Eigen::Index> K;
  std::vector<std::vector<Eigen::Index>> dims;
  std::vector<std::vector<int>> carried;
  std::vector<std::uint64_t> center_offsets, basis_offsets;
  for (int j = 0; j <= dict.max_scale(); ++j) {
    K.push_back(dict.size(j));
    std::vector<Eigen::Index> dj;
    std::vector<int> cj;
    for (const auto& p : dict.scale(j)) {
      dj.push_back(p.local_dim());
      cj.push_back(p.carried ? 1 : 0);
    }
    dims.push_back(std::move(dj));
    carried.push_back(std::move(cj));
  }
  for (int j = 0; j <= dict.max_scale(); ++j) {
    center_offsets.push_back(8 * c.blob.size());
    for (const auto& p : dict.scale(j)) c.blob.insert(c.blob.end(), p.center.data(), p.center.data() + D);
  }
  const std::uint64_t bases_offset = 8 * c.blob.size();
  for (int j = 0; j <= dict.max_scale(); ++j) {
    basis_offsets.push_back(8 * c.blob.size());
    for (const auto& p : dict.scale(j)) c.blob.insert(c.blob.end(), p.basis.data(), p.basis.data() + p.basis.size());
  }
  c.manifest = {{"format_version", kFormatVersion},
                {"kind", "multiscale_dictionary"},
                {"D", D},
                {"J", dict.max_scale()},
                {"K", K},
                {"local_dims", dims},
                {"carried", carried},
                {"parents", dict.parents()},
                {"sep_constant", dict.sep_constant()},
                {"root_radius", dict.root_radius()},
                {"provenance", dict.provenance()},
                {"centers_offset", 0},
                {"bases_offset", bases_offset},
                {"scale_center_offsets", center_offsets},
                {"scale_basis_offsets", basis_offsets},
                {"blob_bytes", 8 * c.blob.size()}};
  write_container(path, kDictionaryMagic, c);
}

inline MultiscaleDictionary load_dictionary(const std::string& path) {
  const Container c = read_container(path, kDictionaryMagic);
  const auto& m = c.manifest;
  try {
    const Eigen::Index D = m.at("D").get<Eigen::Index>();
    const int J = m.at("J").get<int>();
    const auto K = m.at("K").get<std::vector<Eigen::Index>>();
    const auto dims = m.at("local_dims").get<std::vector<std::vector<Eigen::Index>>>();
    const auto carried = m.at("carried").get<std::vector<std::vector<int>>>();
    auto parents = m.at("parents").get<std::vector<std::vector<Eigen::Index>>>();
    const auto center_offsets = m.at("scale_center_offsets").get<std::vector<std::uint64_t>>();
    const auto basis_offsets = m.at("scale_basis_offsets").get<std::vector<std::uint64_t>>();
    const auto nscales = static_cast<std::size_t>(J) + 1;
    if (D < 1 || J < 0 || K.size() != nscales || dims.size() != nscales || carried.size() != nscales ||
        center_offsets.size() != nscales || basis_offsets.size() != nscales) {
      throw ParseError(path + ": inconsistent manifest");
    }
    for (std::size_t j = 1; j < nscales; ++j) {
      if (K[j] < K[j - 1]) {
        throw InvariantViolation(path + ": K_" + std::to_string(j) + " < K_" + std::to_string(j - 1));
      }
    }
    std::vector<std::vector<AffineProjector>> scales(nscales);
    for (std::size_t j = 0; j < nscales; ++j) {
      if (dims[j].size() != static_cast<std::size_t>(K[j]) || carried[j].size() != static_cast<std::size_t>(K[j])) {
        throw ParseError(path + ": per-projector arrays do not match K");
      }
      std::uint64_t co = center_offsets[j] / 8, bo = basis_offsets[j] / 8;
      for (Eigen::Index k = 0; k < K[j]; ++k) {
        const Eigen::Index d = dims[j][static_cast<std::size_t>(k)];
        if (d < 1 || d > D) throw ParseError(path + ": bad local dimension");
        if (co + static_cast<std::uint64_t>(D) > c.blob.size() || bo + static_cast<std::uint64_t>(d * D) > c.blob.size()) {
          throw ParseError(path + ": offset outside blob");
        }
        AffineProjector p;
        p.center = Eigen::Map<const Vector>(c.blob.data() + co, D);
        p.basis = Eigen::Map<const RowMatrix>(c.blob.data() + bo, d, D);
        p.scale = static_cast<int>(j);
        p.index = k;
        p.carried = carried[j][static_cast<std::size_t>(k)] != 0;
        co += static_cast<std::uint64_t>(D);
        bo += static_cast<std::uint64_t>(d * D);
        scales[j].push_back(std::move(p));
      }
    }
    return MultiscaleDictionary(std::move(scales), std::move(parents), m.at("sep_constant").get<double>(),
                                m.at("root_radius").get<double>(), m.value("provenance", nlohmann::json::object()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": malformed manifest: " + e.what());
  }
}

}  // namespace mcs
