#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace mcs {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_ci_low = -std::numeric_limits<double>::infinity();
  double slope_ci_high = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
};

/// Ordinary least squares y = a + b x with a two-sided 95% interval on b
/// (Student t, n - 2 degrees of freedom; unbounded when n < 3).
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all equal");
  LineFit fit;
  fit.count = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() >= 3) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    const double se = std::sqrt(rss / (n - 2.0) / sxx);
    const boost::math::students_t t(n - 2.0);
    const double q = boost::math::quantile(boost::math::complement(t, 0.025));
    fit.slope_ci_low = fit.slope - q * se;
    fit.slope_ci_high = fit.slope + q * se;
  }
  return fit;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

}  // namespace mcs
