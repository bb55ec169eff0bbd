#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "qsl/linalg.hpp"

namespace qsl::test {

inline double rel_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

inline bool is_hermitian(const ComplexMatrix& a, double tol) { return (a - a.adjoint()).norm() <= tol * std::max(1.0, a.norm()); }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qsl_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace qsl::test
