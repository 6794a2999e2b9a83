#pragma once

// Dense vectors, packed symmetric matrices and packed symmetric 3-tensors,
// plus the contraction kernels needed by derivative orders d <= 3.
// The contraction kernels are OpenMP-parallel over independent output
// entries, so results are bitwise reproducible for any thread count.
// Naive serial counterparts live in reference_kernels.hpp.

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace hotm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Symmetric n x n matrix stored as the packed lower triangle, so symmetry
/// is structural rather than checked.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {}

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.ref(i, i) = 1.0;
    return m;
  }
  static SymMatrix from_dense(const Mat& d);

  int dim() const { return n_; }

  double operator()(int i, int j) const {
    return i >= j ? a_[idx(i, j)] : a_[idx(j, i)];
  }
  double& ref(int i, int j) {  // requires i >= j
    return a_[idx(i, j)];
  }

  void add_identity(double c) {
    for (int i = 0; i < n_; ++i) a_[idx(i, i)] += c;
  }
  /// this += c * v v^T
  void add_rank1(double c, const Vec& v);
  /// Accumulate sum_s coeff[s] * row_s row_s^T where row_s are rows of A (m x n).
  void add_weighted_gram(const Vec& coeff, const Mat& a_rows);

  Vec apply(const Vec& v) const;
  double quadratic_form(const Vec& v) const { return v.dot(apply(v)); }
  Mat dense() const;
  double frobenius_norm() const;

  const std::vector<double>& packed() const { return a_; }

 private:
  static std::size_t idx(int i, int j) {  // i >= j
    return static_cast<std::size_t>(i) * (i + 1) / 2 + j;
  }
  int n_ = 0;
  std::vector<double> a_;
};

/// Symmetric n x n x n tensor stored at canonical multi-indices i <= j <= k.
/// Any permutation of (i,j,k) reads the same entry by construction.
class SymTensor3 {
 public:
  SymTensor3() = default;
  explicit SymTensor3(int n);

  int dim() const { return n_; }
  std::size_t packed_size() const { return a_.size(); }

  double operator()(int i, int j, int k) const;
  double& canonical(int i, int j, int k);  // requires i <= j <= k

  /// this += c * v (x) v (x) v
  void add_sym_rank1(double c, const Vec& v);
  /// this += c * sym(W (x) s): entry(i,j,k) += c*(W(i,j)s_k + W(i,k)s_j + W(j,k)s_i)
  void add_sym_matvec(double c, const SymMatrix& w, const Vec& s);
  /// this += sum_s coeff[s] * row_s (x) row_s (x) row_s, rows of A (m x n).
  void add_weighted_rank1_rows(const Vec& coeff, const Mat& a_rows);

  const std::vector<double>& packed() const { return a_; }

 private:
  friend SymMatrix contract3_to_matrix(const SymTensor3&, const Vec&);
  friend double contract3_full(const SymTensor3&, const Vec&, const Vec&, const Vec&);
  friend double operator_norm_upper(const SymTensor3&);

  std::size_t idx(int i, int j, int k) const {  // i <= j <= k
    return base_[i] + static_cast<std::size_t>(j - i) * (2 * n_ - i - j + 1) / 2 +
           static_cast<std::size_t>(k - j);
  }
  int n_ = 0;
  std::vector<double> a_;
  std::vector<std::size_t> base_;  // block offset of first index
};

/// result[i][j] = sum_k T[i,j,k] z[k]
SymMatrix contract3_to_matrix(const SymTensor3& t, const Vec& z);

/// Full contraction T[z1, z2, z3]; symmetric in its vector arguments.
double contract3_full(const SymTensor3& t, const Vec& z1, const Vec& z2, const Vec& z3);

/// Upper estimate of the tensor operator norm (Frobenius norm, so always
/// >= the true operator norm).
double operator_norm_upper(const SymTensor3& t);

}  // namespace hotm
