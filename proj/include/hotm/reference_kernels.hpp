#pragma once

// Naive serial triple-loop kernels over the full index cube. These are the
// reference implementations the parallel kernels in multilinear.cpp are
// tested and benchmarked against.

#include "hotm/multilinear.hpp"

#include <cmath>

namespace hotm::ref {

inline Mat contract3_to_matrix(const SymTensor3& t, const Vec& z) {
  const int n = t.dim();
  Mat out = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i, j) += t(i, j, k) * z[k];
  return out;
}

inline double contract3_full(const SymTensor3& t, const Vec& z1, const Vec& z2, const Vec& z3) {
  const int n = t.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += t(i, j, k) * z1[i] * z2[j] * z3[k];
  return s;
}

inline double frobenius_norm(const SymTensor3& t) {
  const int n = t.dim();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += t(i, j, k) * t(i, j, k);
  return std::sqrt(s);
}

}  // namespace hotm::ref
