#pragma once

// Closed-form covering and measurement-count bounds. Asymptotic constants
// are explicit (`big_o_constant`), logarithms are natural.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mcs {

struct BoundParams {
  int d = 1;                     // intrinsic dimension
  double D = 1;                  // ambient dimension
  double V = 1;                  // d-dimensional volume
  double reach = 1;
  double eps = 0.25;
  int J = 0;
  double C1 = 1;
  double big_o_constant = 1;
  /// Smallest scale index with centers in the tube (from the validator); only
  /// used to check the hypothesis of center_count_bound.
  int j0 = -1;
};

inline void validate(const BoundParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string("bounds: ") + name + " must be positive");
  };
  if (p.d < 1) throw std::invalid_argument("bounds: d must be >= 1");
  positive(p.D, "D");
  positive(p.V, "V");
  positive(p.reach, "reach");
  positive(p.C1, "C1");
  positive(p.big_o_constant, "big_o_constant");
  if (!(p.eps > 0.0 && p.eps <= 0.5)) throw std::invalid_argument("bounds: eps must be in (0, 1/2]");
  if (p.J < 0) throw std::invalid_argument("bounds: J must be >= 0");
}

/// V (d/2 + 1)^{d/2 + 1} / (2^{d/2} delta^d), bound on a minimal delta-cover.
inline double cover_bound(const BoundParams& p, double delta) {
  if (p.d < 1) throw std::invalid_argument("cover_bound: d must be >= 1");
  if (!(p.V > 0.0)) throw std::invalid_argument("cover_bound: V must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("cover_bound: delta must be positive");
  if (!(delta < p.reach)) throw std::invalid_argument("cover_bound: delta must be below reach");
  const double h = 0.5 * p.d;
  return p.V * std::pow(h + 1.0, h + 1.0) / (std::pow(2.0, h) * std::pow(delta, p.d));
}

/// 2^{d(j + 1.5)} / C1^d * V * (d/2 + 1)^{d/2 + 1}, bound on K_j.
inline double center_count_bound(const BoundParams& p, int j) {
  if (p.d < 1) throw std::invalid_argument("center_count_bound: d must be >= 1");
  if (!(p.V > 0.0) || !(p.C1 > 0.0)) throw std::invalid_argument("center_count_bound: V and C1 must be positive");
  const double h = 0.5 * p.d;
  return std::pow(2.0, p.d * (j + 1.5)) / std::pow(p.C1, p.d) * p.V * std::pow(h + 1.0, h + 1.0);
}

/// Scales j at which center_count_bound applies: j > max{j0, log2(C1/reach) - 2}.
inline bool center_count_bound_valid(const BoundParams& p, int j) {
  return j > p.j0 && static_cast<double>(j) > std::log2(p.C1 / p.reach) - 2.0;
}

namespace detail {
inline long long ceil_count(double v) {
  if (!std::isfinite(v) || v > 9.0e18) throw std::overflow_error("bounds: measurement count overflows");
  return static_cast<long long>(std::ceil(v - 1e-12 * std::abs(v)));
}
}  // namespace detail

/// Real-valued c (d eps^-2 (J + ln(d/eps)) + eps^-2 ln V).
inline double m_nonuniform_value(const BoundParams& p) {
  validate(p);
  const double e2 = 1.0 / (p.eps * p.eps);
  return p.big_o_constant * (p.d * e2 * (p.J + std::log(p.d / p.eps)) + e2 * std::log(p.V));
}

inline long long m_nonuniform(const BoundParams& p) { return detail::ceil_count(m_nonuniform_value(p)); }

/// Real-valued c (d eps^-2 ln(D/(eps reach)) + d eps^-2 J + eps^-2 ln V).
inline double m_uniform_value(const BoundParams& p) {
  validate(p);
  const double e2 = 1.0 / (p.eps * p.eps);
  return p.big_o_constant * (p.d * e2 * std::log(p.D / (p.eps * p.reach)) + p.d * e2 * p.J + e2 * std::log(p.V));
}

inline long long m_uniform(const BoundParams& p) { return detail::ceil_count(m_uniform_value(p)); }

/// Precision form c (d ln(D/(delta reach)) + ln V) of the uniform count.
inline long long m_uniform_precision(const BoundParams& p, double delta) {
  validate(p);
  if (!(delta > 0.0)) throw std::invalid_argument("m_uniform_precision: delta must be positive");
  return detail::ceil_count(p.big_o_constant * (p.d * std::log(p.D / (delta * p.reach)) + std::log(p.V)));
}

/// Precision form c (d ln(d/(delta reach)) + ln V) of the nonuniform count,
/// i.e. the eps-form with J = ln(1/(delta reach)) absorbed.
inline long long m_nonuniform_precision(const BoundParams& p, double delta) {
  validate(p);
  if (!(delta > 0.0)) throw std::invalid_argument("m_nonuniform_precision: delta must be positive");
  return detail::ceil_count(p.big_o_constant * (p.d * std::log(p.d / (delta * p.reach)) + std::log(p.V)));
}

/// ceil(c eps^-2 ln |S|), rows sufficient for an eps-distortion embedding of S.
inline long long m_jl(double set_size, double eps, double c = 8.0) {
  if (!(set_size >= 1.0)) throw std::invalid_argument("m_jl: |S| must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("m_jl: eps must be in (0, 1)");
  if (!(c > 0.0)) throw std::invalid_argument("m_jl: constant must be positive");
  return detail::ceil_count(c * std::log(set_size) / (eps * eps));
}

}  // namespace mcs
