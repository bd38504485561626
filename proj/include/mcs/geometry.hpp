#pragma once

// Point clouds: synthetic generators, noise, greedy covers and nets, CSV I/O.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcs/error.hpp"
#include "mcs/rng.hpp"
#include "mcs/types.hpp"

namespace mcs {

/// n points in R^D stored row-wise. Immutable after construction.
class PointCloud {
 public:
  PointCloud() = default;

  explicit PointCloud(RowMatrix points, std::optional<std::string> label = std::nullopt)
      : points_(std::move(points)), label_(std::move(label)) {
    if (points_.rows() < 1 || points_.cols() < 1) {
      throw std::invalid_argument("PointCloud: need n >= 1 points of dimension D >= 1");
    }
    if (!points_.allFinite()) {
      for (Eigen::Index i = 0; i < points_.rows(); ++i) {
        if (!points_.row(i).allFinite()) {
          throw std::invalid_argument("PointCloud: non-finite entry in row " + std::to_string(i));
        }
      }
    }
  }

  Eigen::Index size() const { return points_.rows(); }
  Eigen::Index ambient_dim() const { return points_.cols(); }
  const RowMatrix& points() const { return points_; }
  auto point(Eigen::Index i) const { return points_.row(i); }
  const std::optional<std::string>& label() const { return label_; }

  bool operator==(const PointCloud& other) const {
    return points_.rows() == other.points_.rows() && points_.cols() == other.points_.cols() &&
           points_ == other.points_;
  }

 private:
  RowMatrix points_;
  std::optional<std::string> label_;
};

// ---------------------------------------------------------------------------
// Generators. Point i of a cloud is drawn from Rng(seed, i), so clouds are
// pure functions of (arguments, seed) and any prefix is a valid smaller cloud.

/// Swiss roll (t cos t, h, t sin t), t ~ U[3pi/2, 9pi/2], h ~ U[0, 21].
struct SwissRoll {
  static constexpr double t_min = 1.5 * std::numbers::pi;
  static constexpr double t_max = 4.5 * std::numbers::pi;
  static constexpr double height = 21.0;

  static Eigen::Vector3d embed(double t, double h) {
    return {t * std::cos(t), h, t * std::sin(t)};
  }
};

inline PointCloud gen_swiss_roll(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("gen_swiss_roll: n must be >= 1");
  RowMatrix pts(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, i);
    const double t = rng.uniform(SwissRoll::t_min, SwissRoll::t_max);
    const double h = rng.uniform(0.0, SwissRoll::height);
    pts.row(static_cast<Eigen::Index>(i)) = SwissRoll::embed(t, h).transpose();
  }
  return PointCloud(std::move(pts), "swiss_roll");
}

/// Uniform samples of the unit d-sphere in R^{d+1} (normalised Gaussians).
inline PointCloud gen_sphere(std::size_t n, int d, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("gen_sphere: n must be >= 1");
  if (d < 1) throw std::invalid_argument("gen_sphere: intrinsic dimension must be >= 1");
  const Eigen::Index D = d + 1;
  RowMatrix pts(static_cast<Eigen::Index>(n), D);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, i);
    Vector g(D);
    double norm = 0.0;
    do {
      for (Eigen::Index c = 0; c < D; ++c) g[c] = rng.normal();
      norm = g.norm();
    } while (norm == 0.0);
    pts.row(static_cast<Eigen::Index>(i)) = (g / norm).transpose();
  }
  return PointCloud(std::move(pts), "sphere" + std::to_string(d));
}

/// Adds N(0, sigma^2/D I_D) to every point. Stream i of `seed` perturbs point i.
inline PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return cloud;
  const Eigen::Index D = cloud.ambient_dim();
  const double sd = sigma / std::sqrt(static_cast<double>(D));
  RowMatrix pts = cloud.points();
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i));
    for (Eigen::Index c = 0; c < D; ++c) pts(i, c) += sd * rng.normal();
  }
  return PointCloud(std::move(pts), cloud.label());
}

/// Isometric linear embedding R^k -> R^D, x -> E x with E^T E = I.
struct IsometricEmbedding {
  RowMatrix basis;  // D x k, orthonormal columns

  Vector apply(const Vector& x) const { return basis * x; }
  Vector restrict(const Vector& y) const { return basis.transpose() * y; }
};

/// Random isometric embedding drawn from the Haar measure (QR of a Gaussian).
inline IsometricEmbedding random_isometric_embedding(Eigen::Index source_dim, Eigen::Index ambient_dim,
                                                     std::uint64_t seed) {
  if (source_dim < 1 || ambient_dim < source_dim) {
    throw std::invalid_argument("random_isometric_embedding: need 1 <= k <= D");
  }
  Rng rng(seed);
  Eigen::MatrixXd g(ambient_dim, source_dim);
  for (Eigen::Index r = 0; r < ambient_dim; ++r)
    for (Eigen::Index c = 0; c < source_dim; ++c) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ambient_dim, source_dim);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(source_dim).triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < source_dim; ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  return IsometricEmbedding{q};
}

inline PointCloud embed(const PointCloud& cloud, const IsometricEmbedding& e) {
  require_dim(cloud.ambient_dim(), e.basis.cols(), "embed");
  RowMatrix pts = cloud.points() * e.basis.transpose();
  return PointCloud(std::move(pts), cloud.label());
}

// ---------------------------------------------------------------------------
// Covers and nets.

struct CoverResult {
  std::vector<Eigen::Index> center_indices;
  double radius = 0.0;
};

/// Farthest-point ordering from row 0: each row's distance to the rows
/// inserted before it. Stops once the remaining maximum is <= stop_radius.
struct FarthestPointOrder {
  std::vector<Eigen::Index> order;
  std::vector<double> insertion_radius;  // first entry is +inf
};

inline FarthestPointOrder farthest_point_order(const RowMatrix& pts, double stop_radius) {
  const Eigen::Index n = pts.rows();
  FarthestPointOrder out;
  if (n == 0) return out;
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Eigen::Index next = 0;
  double next_radius = std::numeric_limits<double>::infinity();
  const double stop2 = stop_radius * stop_radius;
  while (true) {
    out.order.push_back(next);
    out.insertion_radius.push_back(next_radius);
    const auto c = pts.row(next);
    double far2 = -1.0;
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      double& di = nearest[static_cast<std::size_t>(i)];
      if (di > 0.0) {
        const double d2 = squared_distance(pts.row(i), c);
        if (d2 < di) di = d2;
      }
      if (di > far2) {
        far2 = di;
        far = i;
      }
    }
    if (far < 0 || far2 <= stop2) break;
    next = far;
    next_radius = std::sqrt(far2);
  }
  return out;
}

/// Greedy farthest-point delta-net: every point lies within delta of a
/// center and centers are pairwise more than delta apart.
inline CoverResult greedy_delta_cover(const PointCloud& cloud, double delta) {
  if (cloud.size() == 0) throw std::invalid_argument("greedy_delta_cover: empty cloud");
  if (!(delta > 0.0)) throw std::invalid_argument("greedy_delta_cover: delta must be > 0");
  auto fps = farthest_point_order(cloud.points(), delta);
  return CoverResult{std::move(fps.order), delta};
}

/// (eps/4)-net of the closed unit ball in R^dim, plus the origin.
///
/// Built from the cubic grid of spacing 2r/sqrt(dim), r = eps/4: every ball
/// point lies in a cell whose centre is within r, and replacing centres
/// outside the ball by their radial projection only shortens distances to
/// ball points. Rejects requests whose (12/eps)^dim estimate or grid size
/// exceeds 1e7.
inline std::vector<Vector> epsilon_net_ball(int dim, double eps) {
  if (dim < 1) throw std::invalid_argument("epsilon_net_ball: dim must be >= 1");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("epsilon_net_ball: eps must be in (0, 1/2)");
  constexpr double budget = 1e7;
  const double projected = std::pow(12.0 / eps, dim);
  const double r = eps / 4.0;
  const double spacing = 2.0 * r / std::sqrt(static_cast<double>(dim));
  const auto per_axis = static_cast<std::int64_t>(std::ceil(2.0 / spacing));
  const double grid = std::pow(static_cast<double>(per_axis), dim);
  if (projected > budget || grid > budget) {
    throw ResourceLimitError("epsilon_net_ball: projected net size exceeds 1e7 (dim=" + std::to_string(dim) +
                             ", eps=" + std::to_string(eps) + ")");
  }
  // Cells tile [-a, a]^dim with a = per_axis * spacing / 2 >= 1.
  const double a = 0.5 * static_cast<double>(per_axis) * spacing;
  const double reach = 1.0 + r;  // cells farther than this cannot meet the ball
  std::vector<Vector> net;
  net.emplace_back(Vector::Zero(dim));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(dim), 0);
  Vector c(dim);
  while (true) {
    for (int k = 0; k < dim; ++k) c[k] = -a + (static_cast<double>(idx[k]) + 0.5) * spacing;
    const double norm = c.norm();
    if (norm <= reach) net.emplace_back(norm > 1.0 ? Vector(c / norm) : c);
    int k = 0;
    while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == dim) break;
  }
  return net;
}

// ---------------------------------------------------------------------------
// CSV: comma separated, optional single header row, 17 significant digits.

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses rows of numbers. A non-numeric first row is treated as a header
/// and returned through `header` when non-null.
inline RowMatrix parse_csv_matrix(std::istream& in, std::vector<std::string>* header = nullptr) {
  std::vector<double> values;
  Eigen::Index cols = -1, rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto fields = detail::split_fields(body);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size() && numeric; ++i) numeric = detail::parse_double(fields[i], row[i]);
    if (!numeric) {
      if (rows == 0 && cols < 0) {
        if (header) {
          header->clear();
          for (auto f : fields) header->emplace_back(detail::trim(f));
        }
        cols = static_cast<Eigen::Index>(fields.size());
        continue;
      }
      throw ParseError("csv: non-numeric field on line " + std::to_string(line_no), line_no);
    }
    if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("csv: ragged row on line " + std::to_string(line_no) + " (" + std::to_string(row.size()) +
                           " fields, expected " + std::to_string(cols) + ")",
                       line_no);
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows");
  RowMatrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

inline PointCloud load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);
  try {
    return PointCloud(parse_csv_matrix(in));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

inline void write_csv_matrix(std::ostream& out, const RowMatrix& m, const std::vector<std::string>& header = {}) {
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << detail::format_double(m(r, c));
    out << '\n';
  }
}

inline void save_csv(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  write_csv_matrix(out, cloud.points());
  if (!out) throw std::runtime_error("save_csv: write failed for " + path);
}

/// FNV-1a over the little-endian bytes of the entries; recorded as the
/// provenance hash of the cloud a dictionary was built from.
inline std::uint64_t content_hash(const RowMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(m.rows()));
  mix(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) mix(std::bit_cast<std::uint64_t>(m.data()[i]));
  return h;
}

inline std::string hash_string(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mcs
