#include "hotm/multilinear.hpp"

#include <cmath>
#include <stdexcept>

namespace hotm {

namespace {
void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

SymMatrix SymMatrix::from_dense(const Mat& d) {
  require(d.rows() == d.cols(), "SymMatrix::from_dense: matrix not square");
  SymMatrix m(static_cast<int>(d.rows()));
  for (int i = 0; i < m.n_; ++i)
    for (int j = 0; j <= i; ++j) m.ref(i, j) = 0.5 * (d(i, j) + d(j, i));
  return m;
}

void SymMatrix::add_rank1(double c, const Vec& v) {
  require(v.size() == n_, "SymMatrix::add_rank1: dimension mismatch");
  for (int i = 0; i < n_; ++i) {
    const double cvi = c * v[i];
    double* row = a_.data() + idx(i, 0);
    for (int j = 0; j <= i; ++j) row[j] += cvi * v[j];
  }
}

void SymMatrix::add_weighted_gram(const Vec& coeff, const Mat& a_rows) {
  require(a_rows.cols() == n_ && a_rows.rows() == coeff.size(),
          "SymMatrix::add_weighted_gram: dimension mismatch");
  const int m = static_cast<int>(a_rows.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_; ++i) {
    double* row = a_.data() + idx(i, 0);
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += coeff[r] * a_rows(r, i) * a_rows(r, j);
      row[j] += s;
    }
  }
}

Vec SymMatrix::apply(const Vec& v) const {
  require(v.size() == n_, "SymMatrix::apply: dimension mismatch");
  Vec out = Vec::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    const double* row = a_.data() + idx(i, 0);
    double s = row[i] * v[i];
    for (int j = 0; j < i; ++j) {
      s += row[j] * v[j];
      out[j] += row[j] * v[i];
    }
    out[i] += s;
  }
  return out;
}

Mat SymMatrix::dense() const {
  Mat d(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j <= i; ++j) d(i, j) = d(j, i) = a_[idx(i, j)];
  return d;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double* row = a_.data() + idx(i, 0);
    for (int j = 0; j < i; ++j) s += 2.0 * row[j] * row[j];
    s += row[i] * row[i];
  }
  return std::sqrt(s);
}

SymTensor3::SymTensor3(int n) : n_(n), base_(static_cast<std::size_t>(n) + 1, 0) {
  for (int i = 0; i < n; ++i) {
    const std::size_t block = static_cast<std::size_t>(n - i) * (n - i + 1) / 2;
    base_[i + 1] = base_[i] + block;
  }
  a_.assign(base_[n], 0.0);
}

double SymTensor3::operator()(int i, int j, int k) const {
  if (i > j) std::swap(i, j);
  if (j > k) std::swap(j, k);
  if (i > j) std::swap(i, j);
  return a_[idx(i, j, k)];
}

double& SymTensor3::canonical(int i, int j, int k) { return a_[idx(i, j, k)]; }

void SymTensor3::add_sym_rank1(double c, const Vec& v) {
  require(v.size() == n_, "SymTensor3::add_sym_rank1: dimension mismatch");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_; ++i) {
    std::size_t p = base_[i];
    const double cvi = c * v[i];
    for (int j = i; j < n_; ++j) {
      const double cvij = cvi * v[j];
      for (int k = j; k < n_; ++k) a_[p++] += cvij * v[k];
    }
  }
}

void SymTensor3::add_sym_matvec(double c, const SymMatrix& w, const Vec& s) {
  require(w.dim() == n_ && s.size() == n_, "SymTensor3::add_sym_matvec: dimension mismatch");
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_; ++i) {
    std::size_t p = base_[i];
    for (int j = i; j < n_; ++j) {
      const double wij = w(i, j);
      for (int k = j; k < n_; ++k)
        a_[p++] += c * (wij * s[k] + w(i, k) * s[j] + w(j, k) * s[i]);
    }
  }
}

void SymTensor3::add_weighted_rank1_rows(const Vec& coeff, const Mat& a_rows) {
  require(a_rows.cols() == n_ && a_rows.rows() == coeff.size(),
          "SymTensor3::add_weighted_rank1_rows: dimension mismatch");
  const int m = static_cast<int>(a_rows.rows());
  // Columns of the (column-major) sample matrix are contiguous, so the
  // per-entry sample loop is a clean stride-1 pass.
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_; ++i) {
    std::size_t p = base_[i];
    const double* ci = a_rows.data() + static_cast<std::size_t>(i) * m;
    for (int j = i; j < n_; ++j) {
      const double* cj = a_rows.data() + static_cast<std::size_t>(j) * m;
      for (int k = j; k < n_; ++k) {
        const double* ck = a_rows.data() + static_cast<std::size_t>(k) * m;
        double s = 0.0;
        for (int r = 0; r < m; ++r) s += coeff[r] * ci[r] * cj[r] * ck[r];
        a_[p++] += s;
      }
    }
  }
}

SymMatrix contract3_to_matrix(const SymTensor3& t, const Vec& z) {
  require(z.size() == t.dim(), "contract3_to_matrix: dimension mismatch");
  const int n = t.dim();
  SymMatrix out(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      // out(i,j) = sum_k T(j,i,k) z_k, split by the canonical ordering of k.
      double s = 0.0;
      for (int k = 0; k < j; ++k) s += t.a_[t.idx(k, j, i)] * z[k];
      for (int k = j; k <= i; ++k) s += t.a_[t.idx(j, k, i)] * z[k];
      const std::size_t row = t.idx(j, i, i);
      for (int k = i + 1; k < n; ++k) s += t.a_[row + (k - i)] * z[k];
      out.ref(i, j) = s;
    }
  }
  return out;
}

double contract3_full(const SymTensor3& t, const Vec& z1, const Vec& z2, const Vec& z3) {
  require(z1.size() == t.dim() && z2.size() == t.dim() && z3.size() == t.dim(),
          "contract3_full: dimension mismatch");
  const int n = t.dim();
  // Per-first-index partial sums, combined serially in index order so the
  // result does not depend on the thread count.
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::size_t p = t.base_[i];
    double acc = 0.0;
    for (int j = i; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        const double v = t.a_[p++];
        double w;
        if (i == j && j == k) {
          w = z1[i] * z2[i] * z3[i];
        } else if (i == j) {
          w = z1[i] * z2[i] * z3[k] + z1[i] * z2[k] * z3[i] + z1[k] * z2[i] * z3[i];
        } else if (j == k) {
          w = z1[i] * z2[j] * z3[j] + z1[j] * z2[i] * z3[j] + z1[j] * z2[j] * z3[i];
        } else {
          w = z1[i] * (z2[j] * z3[k] + z2[k] * z3[j]) + z1[j] * (z2[i] * z3[k] + z2[k] * z3[i]) +
              z1[k] * (z2[i] * z3[j] + z2[j] * z3[i]);
        }
        acc += v * w;
      }
    }
    partial[i] = acc;
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += partial[i];
  return s;
}

double operator_norm_upper(const SymTensor3& t) {
  const int n = t.dim();
  std::vector<double> partial(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    std::size_t p = t.base_[i];
    double acc = 0.0;
    for (int j = i; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        const double v = t.a_[p++];
        const double mult = (i == j && j == k) ? 1.0 : ((i == j || j == k) ? 3.0 : 6.0);
        acc += mult * v * v;
      }
    }
    partial[i] = acc;
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += partial[i];
  return std::sqrt(s);
}

}  // namespace hotm
