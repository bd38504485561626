#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include <unistd.h>

#include "mcs/mcs.hpp"

namespace mcs::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() / ("mcs_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

/// Evenly spaced points on the unit circle, starting at angle `phase`.
inline PointCloud uniform_circle(Eigen::Index n, double phase = 0.0) {
  RowMatrix p(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    p(i, 0) = std::cos(t);
    p(i, 1) = std::sin(t);
  }
  return PointCloud(p);
}

inline MultiscaleDictionary circle_dictionary(Eigen::Index n = 512, int J = 5) {
  BuildOptions o;
  o.max_scale = J;
  o.local_dim = 1;
  return build_dictionary(uniform_circle(n), o);
}

inline double circle_distance(const Vector& x) { return std::abs(x.norm() - 1.0); }

}  // namespace mcs::testing
