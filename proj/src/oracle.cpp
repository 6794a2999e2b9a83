#include "hotm/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hotm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// log(1 + e^t) without overflow
double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }
double sigmoid(double t) {
  if (t >= 0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

NonsmoothTerm NonsmoothTerm::l1(double weight) {
  require(weight >= 0.0, "NonsmoothTerm::l1: weight must be nonnegative");
  return NonsmoothTerm(Kind::L1, weight, {}, {});
}

NonsmoothTerm NonsmoothTerm::box(Vec lower, Vec upper) {
  require(lower.size() == upper.size(), "NonsmoothTerm::box: bound size mismatch");
  require((lower.array() <= upper.array()).all(), "NonsmoothTerm::box: lower > upper");
  return NonsmoothTerm(Kind::Box, 0.0, std::move(lower), std::move(upper));
}

double NonsmoothTerm::evaluate(const Vec& x) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::L1:
      return weight_ * x.lpNorm<1>();
    case Kind::Box:
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] < lower_[i] || x[i] > upper_[i]) return kInf;
      return 0.0;
  }
  return 0.0;
}

Vec NonsmoothTerm::prox(const Vec& x, double t) const {
  require(t > 0.0, "NonsmoothTerm::prox: step must be positive");
  switch (kind_) {
    case Kind::Zero:
      return x;
    case Kind::L1: {
      Vec out(x.size());
      const double tau = weight_ * t;
      for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], tau);
      return out;
    }
    case Kind::Box: {
      Vec out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        out[i] = std::clamp(x[i], lower_[i], upper_[i]);
      return out;
    }
  }
  return x;
}

Vec NonsmoothTerm::min_norm_subgradient(const Vec& x, const Vec& grad_f) const {
  switch (kind_) {
    case Kind::Zero:
      return grad_f;
    case Kind::L1: {
      Vec out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x[i] > 0)
          out[i] = grad_f[i] + weight_;
        else if (x[i] < 0)
          out[i] = grad_f[i] - weight_;
        else
          out[i] = soft_threshold(grad_f[i], weight_);
      }
      return out;
    }
    case Kind::Box: {
      Vec out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lo = x[i] <= lower_[i];
        const bool at_hi = x[i] >= upper_[i];
        double g = grad_f[i];
        if (at_lo && at_hi)
          g = 0.0;
        else if (at_lo)
          g = std::min(g, 0.0);
        else if (at_hi)
          g = std::max(g, 0.0);
        out[i] = g;
      }
      return out;
    }
  }
  return grad_f;
}

Problem::Problem(std::string name, int n, OracleFn oracle, std::array<double, 3> lipschitz,
                 NonsmoothTerm h, Vec x0, OptimumFn optimum)
    : name_(std::move(name)),
      n_(n),
      oracle_(std::move(oracle)),
      lipschitz_(lipschitz),
      h_(std::move(h)),
      x0_(std::move(x0)),
      optimum_fn_(std::move(optimum)),
      optimum_cache_(std::make_shared<OptimumCache>()) {}

double Problem::lipschitz(int d) const {
  require(d >= 1 && d <= 3, "Problem::lipschitz: order out of range");
  return lipschitz_[d - 1];
}

DerivativeBundle Problem::query(const Vec& x, int order) const {
  require(order >= 1 && order <= max_order(), "Problem::query: unsupported derivative order");
  require(x.size() == n_, "Problem::query: dimension mismatch");
  require(x.allFinite(), "Problem::query: point has non-finite entries");
  DerivativeBundle b = oracle_(x, order);
  b.order = order;
  require(std::isfinite(b.value) && b.gradient.allFinite(),
          "Problem::query: oracle returned non-finite values");
  return b;
}

double Problem::objective(const Vec& x) const { return query(x, 1).value + h_.evaluate(x); }

const std::optional<KnownOptimum>& Problem::known_optimum() const {
  std::call_once(optimum_cache_->flag, [this] {
    if (optimum_fn_) optimum_cache_->value = optimum_fn_();
  });
  return optimum_cache_->value;
}

// ---------------------------------------------------------------------------
// Built-in problems
// ---------------------------------------------------------------------------

namespace {

Mat random_gaussian(int rows, int cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = scale * normal(rng);
  return a;
}

std::string format_name(const char* base, int n, int m, std::uint64_t seed) {
  std::ostringstream os;
  os << base << "(n=" << n << ",m=" << m << ",seed=" << seed << ")";
  return os.str();
}

double spectral_norm_sq(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.transpose() * a);
  return es.eigenvalues().maxCoeff();
}

}  // namespace

Problem make_logistic(int n, int m, std::uint64_t seed) {
  require(n >= 1 && m >= 1, "make_logistic: n, m must be positive");
  std::mt19937_64 rng(seed);
  const Mat a = random_gaussian(m, n, 1.0 / std::sqrt(double(n)), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec w_true(n);
  for (int j = 0; j < n; ++j) w_true[j] = normal(rng);
  Vec y(m);
  for (int i = 0; i < m; ++i) {
    const double margin = a.row(i).dot(w_true) + 0.3 * normal(rng);
    y[i] = margin >= 0 ? 1.0 : -1.0;
  }
  const double mu = 1e-2;

  // phi(t) = log(1+e^t): |phi''| <= 1/4, |phi'''| <= 1/(6 sqrt 3), |phi''''| <= 1/8.
  double s2 = 0, s3 = 0, s4 = 0;
  for (int i = 0; i < m; ++i) {
    const double r = a.row(i).norm();
    s2 += r * r;
    s3 += r * r * r;
    s4 += r * r * r * r;
  }
  const std::array<double, 3> lip = {s2 / (4.0 * m) + mu, s3 / (6.0 * std::sqrt(3.0) * m),
                                     s4 / (8.0 * m)};

  auto oracle = [a, y, mu, m](const Vec& x, int order) {
    DerivativeBundle b;
    const Vec ax = a * x;
    const int n_ = static_cast<int>(x.size());
    double val = 0.0;
    Vec phi2(m), phi3(m);
    Vec grad = mu * x;
    for (int i = 0; i < m; ++i) {
      const double t = -y[i] * ax[i];
      val += log1pexp(t);
      const double s = sigmoid(t);
      grad += (s * -y[i] / m) * a.row(i).transpose();
      phi2[i] = s * (1.0 - s) / m;
      phi3[i] = -y[i] * s * (1.0 - s) * (1.0 - 2.0 * s) / m;
    }
    b.value = val / m + 0.5 * mu * x.squaredNorm();
    b.gradient = grad;
    if (order >= 2) {
      SymMatrix h(n_);
      h.add_weighted_gram(phi2, a);
      h.add_identity(mu);
      b.hessian = std::move(h);
    }
    if (order >= 3) {
      SymTensor3 t3(n_);
      t3.add_weighted_rank1_rows(phi3, a);
      b.third = std::move(t3);
    }
    return b;
  };

  Problem::OptimumFn optimum;
  {
    // capture by value; the reference solve runs lazily on first access
    const std::array<double, 3> lip_copy = lip;
    Vec x0 = Vec::Zero(n);
    std::string nm = format_name("logreg", n, m, seed);
    optimum = [oracle, lip_copy, x0, nm]() -> std::optional<KnownOptimum> {
      Problem tmp(nm, static_cast<int>(x0.size()), oracle, lip_copy, NonsmoothTerm::zero(), x0);
      ReferenceSolution ref = reference_newton(tmp, x0, 1e-12);
      return KnownOptimum{ref.x, ref.objective};
    };
  }

  return Problem(format_name("logreg", n, m, seed), n, oracle, lip, NonsmoothTerm::zero(),
                 Vec::Zero(n), optimum);
}

Problem make_log_sum_exp(int n, int m, std::uint64_t seed) {
  require(n >= 1 && m >= 2, "make_log_sum_exp: need n >= 1, m >= 2");
  std::mt19937_64 rng(seed);
  const Mat a = random_gaussian(m, n, 1.0 / std::sqrt(double(n)), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec bshift(m);
  for (int i = 0; i < m; ++i) bshift[i] = 0.1 * normal(rng);

  double amax = 0.0;
  for (int i = 0; i < m; ++i) amax = std::max(amax, a.row(i).norm());
  // Safe over-estimates: L1 = ||A||^2 (softmax is 1-smooth); higher orders
  // from term counts on the softmax derivative tensors.
  const std::array<double, 3> lip = {spectral_norm_sq(a), 6.0 * amax * amax * amax,
                                     17.0 * amax * amax * amax * amax};

  auto oracle = [a, bshift, m](const Vec& x, int order) {
    DerivativeBundle b;
    const int n_ = static_cast<int>(x.size());
    Vec w = a * x + bshift;
    const double wmax = w.maxCoeff();
    Vec p = (w.array() - wmax).exp();
    const double z = p.sum();
    p /= z;
    b.value = wmax + std::log(z);
    const Vec s = a.transpose() * p;
    b.gradient = s;
    if (order >= 2) {
      SymMatrix h(n_);
      h.add_weighted_gram(p, a);  // W = sum p_i a_i a_i^T
      h.add_rank1(-1.0, s);
      b.hessian = std::move(h);
    }
    if (order >= 3) {
      SymMatrix w_mat(n_);
      w_mat.add_weighted_gram(p, a);
      SymTensor3 t3(n_);
      t3.add_weighted_rank1_rows(p, a);
      t3.add_sym_matvec(-1.0, w_mat, s);
      t3.add_sym_rank1(2.0, s);
      b.third = std::move(t3);
    }
    return b;
  };

  return Problem(format_name("logsumexp", n, m, seed), n, oracle, lip, NonsmoothTerm::zero(),
                 Vec::Zero(n));
}

Problem make_lasso(int n, int m, std::uint64_t seed) {
  require(n >= 1 && m >= 1, "make_lasso: n, m must be positive");
  std::mt19937_64 rng(seed);
  const Mat a = random_gaussian(m, n, 1.0 / std::sqrt(double(m)), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  // sparse ground truth: ~n/5 entries at +-1
  Vec x_true = Vec::Zero(n);
  std::uniform_int_distribution<int> pick(0, n - 1);
  const int nnz = std::max(1, n / 5);
  for (int k = 0; k < nnz; ++k) {
    const int i = pick(rng);
    x_true[i] = normal(rng) >= 0 ? 1.0 : -1.0;
  }
  Vec bvec = a * x_true;
  for (int i = 0; i < m; ++i) bvec[i] += 0.01 * normal(rng);

  const double l1 = spectral_norm_sq(a);
  const double weight = 0.2 * (a.transpose() * bvec).lpNorm<Eigen::Infinity>();
  const SymMatrix gram = SymMatrix::from_dense(a.transpose() * a);
  const Vec atb = a.transpose() * bvec;

  auto oracle = [a, bvec, gram, atb](const Vec& x, int order) {
    DerivativeBundle b;
    const Vec r = a * x - bvec;
    b.value = 0.5 * r.squaredNorm();
    b.gradient = a.transpose() * r;
    if (order >= 2) b.hessian = gram;
    if (order >= 3) b.third = SymTensor3(static_cast<int>(x.size()));
    return b;
  };

  const std::array<double, 3> lip = {l1, 0.0, 0.0};
  std::string nm = format_name("lasso", n, m, seed);

  Problem::OptimumFn optimum;
  {
    Vec x0 = Vec::Zero(n);
    NonsmoothTerm h = NonsmoothTerm::l1(weight);
    const std::array<double, 3> lip_copy = lip;
    optimum = [oracle, lip_copy, h, x0, nm]() -> std::optional<KnownOptimum> {
      Problem tmp(nm, static_cast<int>(x0.size()), oracle, lip_copy, h, x0);
      ReferenceSolution ref = reference_prox_gradient(tmp, x0, 1e-11);
      return KnownOptimum{ref.x, ref.objective};
    };
  }

  return Problem(nm, n, oracle, lip, NonsmoothTerm::l1(weight), Vec::Zero(n), optimum);
}

Problem make_quartic(int n) {
  require(n >= 1, "make_quartic: n must be positive");
  auto oracle = [](const Vec& x, int order) {
    DerivativeBundle b;
    const int n_ = static_cast<int>(x.size());
    b.value = 0.25 * x.array().pow(4).sum() + 0.5 * x.squaredNorm();
    b.gradient = x.array().cube().matrix() + x;
    if (order >= 2) {
      SymMatrix h(n_);
      for (int i = 0; i < n_; ++i) h.ref(i, i) = 3.0 * x[i] * x[i] + 1.0;
      b.hessian = std::move(h);
    }
    if (order >= 3) {
      SymTensor3 t(n_);
      for (int i = 0; i < n_; ++i) t.canonical(i, i, i) = 6.0 * x[i];
      b.third = std::move(t);
    }
    return b;
  };
  // L1, L2 documented on the test box [-10,10]^n; L3 = 6 globally.
  const std::array<double, 3> lip = {301.0, 60.0, 6.0};
  std::ostringstream os;
  os << "quartic(n=" << n << ")";
  auto optimum = [n]() -> std::optional<KnownOptimum> {
    return KnownOptimum{Vec::Zero(n), 0.0};
  };
  return Problem(os.str(), n, oracle, lip, NonsmoothTerm::zero(), Vec::Constant(n, 0.5),
                 optimum);
}

std::vector<Problem> builtin_problems() {
  return {make_logistic(20, 100, 42), make_log_sum_exp(10, 40, 42), make_lasso(25, 50, 42),
          make_quartic(10)};
}

std::vector<std::string> builtin_problem_names() {
  return {"logreg", "logsumexp", "lasso", "quartic"};
}

Problem make_problem(const std::string& name, int n, int m, std::uint64_t seed) {
  if (name == "logreg") return make_logistic(n > 0 ? n : 20, m > 0 ? m : 100, seed);
  if (name == "logsumexp") return make_log_sum_exp(n > 0 ? n : 10, m > 0 ? m : 40, seed);
  if (name == "lasso") return make_lasso(n > 0 ? n : 25, m > 0 ? m : 50, seed);
  if (name == "quartic") return make_quartic(n > 0 ? n : 10);
  std::ostringstream os;
  os << "unknown problem '" << name << "'; available:";
  for (const auto& s : builtin_problem_names()) os << " " << s;
  throw std::invalid_argument(os.str());
}

// ---------------------------------------------------------------------------
// Lipschitz validation and reference solvers
// ---------------------------------------------------------------------------

namespace {

double tensor3_diff_frobenius(const SymTensor3& a, const SymTensor3& b) {
  SymTensor3 d = a;
  const int n = d.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) d.canonical(i, j, k) -= b(i, j, k);
  return operator_norm_upper(d);  // Frobenius of the difference
}

double matrix_diff_frobenius(const SymMatrix& a, const SymMatrix& b) {
  double s = 0.0;
  const int n = a.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = a(i, j) - b(i, j);
      s += d * d;
    }
  return std::sqrt(s);
}

}  // namespace

std::vector<LipschitzReport> validate_lipschitz(const Problem& p, int trials,
                                                std::uint64_t seed) {
  require(trials >= 1, "validate_lipschitz: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-10.0, 10.0);
  const int n = p.dim();

  std::vector<LipschitzReport> reports;
  for (int d = 1; d <= p.max_order(); ++d) {
    LipschitzReport rep;
    rep.order = d;
    rep.documented = p.lipschitz(d);
    rep.trials = trials;
    for (int t = 0; t < trials; ++t) {
      Vec x(n), y(n);
      for (int i = 0; i < n; ++i) x[i] = box(rng);
      for (int i = 0; i < n; ++i) y[i] = box(rng);
      const double dist = (x - y).norm();
      if (dist < 1e-12) continue;
      const DerivativeBundle bx = p.query(x, d);
      const DerivativeBundle by = p.query(y, d);
      double diff = 0.0;
      if (d == 1)
        diff = (bx.gradient - by.gradient).norm();
      else if (d == 2)
        diff = matrix_diff_frobenius(*bx.hessian, *by.hessian);
      else
        diff = tensor3_diff_frobenius(*bx.third, *by.third);
      rep.max_ratio = std::max(rep.max_ratio, diff / dist);
    }
    rep.violated = rep.max_ratio > rep.documented * (1.0 + 1e-9);
    reports.push_back(rep);
  }
  return reports;
}

ReferenceSolution reference_newton(const Problem& p, Vec x0, double grad_tol, int max_iter) {
  require(p.h().is_zero(), "reference_newton: smooth problems only");
  Vec x = std::move(x0);
  ReferenceSolution out;
  for (int it = 0; it < max_iter; ++it) {
    DerivativeBundle b = p.query(x, 2);
    out.iterations = it;
    out.residual = b.gradient.norm();
    if (out.residual <= grad_tol) break;
    Mat h = b.hessian->dense();
    Vec step = h.ldlt().solve(-b.gradient);
    if (!step.allFinite()) step = -b.gradient;
    // Armijo backtracking, with rounding slack so the search does not stall
    // once f differences sit below the double resolution
    double t = 1.0;
    const double slope = b.gradient.dot(step);
    const double f_slack = 1e-14 * (1.0 + std::abs(b.value));
    for (int ls = 0; ls < 60; ++ls) {
      if (p.query(x + t * step, 1).value <= b.value + 1e-4 * t * slope + f_slack) break;
      t *= 0.5;
    }
    x += t * step;
  }
  out.x = x;
  out.objective = p.objective(x);
  out.residual = p.query(x, 1).gradient.norm();
  return out;
}

ReferenceSolution reference_prox_gradient(const Problem& p, Vec x0, double tol, int max_iter) {
  const double t = 1.0 / p.lipschitz(1);
  Vec x = std::move(x0);
  Vec z = x;  // extrapolated point
  double theta = 1.0;
  double f_prev = p.objective(x);
  ReferenceSolution out;
  int it = 0;
  for (; it < max_iter; ++it) {
    const DerivativeBundle b = p.query(z, 1);
    Vec x_next = p.h().prox(z - t * b.gradient, t);
    const double fx_next = p.objective(x_next);
    if (fx_next > f_prev) {  // function restart
      z = x;
      theta = 1.0;
      const DerivativeBundle br = p.query(z, 1);
      x_next = p.h().prox(z - t * br.gradient, t);
    }
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    z = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
    x = x_next;
    theta = theta_next;
    f_prev = p.objective(x);

    const Vec gx = p.query(x, 1).gradient;
    const double res = (x - p.h().prox(x - t * gx, t)).norm() / t;
    out.residual = res;
    if (res <= tol) break;
  }
  out.x = x;
  out.objective = p.objective(x);
  out.iterations = it;
  return out;
}

}  // namespace hotm
