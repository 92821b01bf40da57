#pragma once

#include <initializer_list>

#include "hfc/operator_core.hpp"

namespace testing {

inline hfc::Matrix diag(std::initializer_list<hfc::Complex> v) {
  hfc::Vector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (auto z : v) d[i++] = z;
  return d.asDiagonal();
}

inline hfc::Matrix mat2(hfc::Complex a, hfc::Complex b, hfc::Complex c, hfc::Complex d) {
  hfc::Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline hfc::Matrix scalar(hfc::Complex a) { return hfc::Matrix::Constant(1, 1, a); }

inline double rel(const hfc::Matrix& a, const hfc::Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace testing
