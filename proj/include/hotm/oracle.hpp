#pragma once

// d-th order oracle: problem definitions with analytic derivatives up to
// order 3, documented Lipschitz constants per order, and a prox-friendly
// nonsmooth term.

#include "hotm/multilinear.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace hotm {

struct DerivativeBundle {
  double value = 0.0;
  Vec gradient;
  std::optional<SymMatrix> hessian;
  std::optional<SymTensor3> third;
  int order = 1;
};

/// h in the composite objective F = f + h. Kinds: Zero, weighted L1,
/// box indicator. prox(x,t) is the exact minimizer of h(y) + ||y-x||^2/(2t).
class NonsmoothTerm {
 public:
  enum class Kind { Zero, L1, Box };

  static NonsmoothTerm zero() { return NonsmoothTerm(Kind::Zero, 0.0, {}, {}); }
  static NonsmoothTerm l1(double weight);
  static NonsmoothTerm box(Vec lower, Vec upper);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  double weight() const { return weight_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  double evaluate(const Vec& x) const;  // +inf outside the box
  Vec prox(const Vec& x, double t) const;
  /// Minimum-norm element of grad_f + subdifferential(h) at x; the composite
  /// stationarity residual.
  Vec min_norm_subgradient(const Vec& x, const Vec& grad_f) const;

 private:
  NonsmoothTerm(Kind k, double w, Vec lo, Vec hi)
      : kind_(k), weight_(w), lower_(std::move(lo)), upper_(std::move(hi)) {}
  Kind kind_;
  double weight_;
  Vec lower_, upper_;
};

struct KnownOptimum {
  Vec x_star;
  double f_star = 0.0;  // composite optimal value F(x_star)
};

/// Immutable problem instance: smooth oracle, Lipschitz constants L_d for
/// d = 1..3, nonsmooth term, default start, optional (lazily resolved)
/// known optimum.
class Problem {
 public:
  using OracleFn = std::function<DerivativeBundle(const Vec&, int)>;
  using OptimumFn = std::function<std::optional<KnownOptimum>()>;

  Problem(std::string name, int n, OracleFn oracle, std::array<double, 3> lipschitz,
          NonsmoothTerm h, Vec x0, OptimumFn optimum = nullptr);

  const std::string& name() const { return name_; }
  int dim() const { return n_; }
  int max_order() const { return 3; }
  double lipschitz(int d) const;  // L_d, d in {1,2,3}
  const NonsmoothTerm& h() const { return h_; }
  const Vec& default_start() const { return x0_; }

  DerivativeBundle query(const Vec& x, int order) const;
  double objective(const Vec& x) const;  // F(x) = f(x) + h(x)

  const std::optional<KnownOptimum>& known_optimum() const;

 private:
  std::string name_;
  int n_;
  OracleFn oracle_;
  std::array<double, 3> lipschitz_;
  NonsmoothTerm h_;
  Vec x0_;
  OptimumFn optimum_fn_;
  struct OptimumCache {
    std::once_flag flag;
    std::optional<KnownOptimum> value;
  };
  std::shared_ptr<OptimumCache> optimum_cache_;
};

// Built-in problems. Seeds and sizes are recorded in the problem name.
Problem make_logistic(int n, int m, std::uint64_t seed);     // logistic regression + l2, smooth
Problem make_log_sum_exp(int n, int m, std::uint64_t seed);  // log-sum-exp of random affine forms
Problem make_lasso(int n, int m, std::uint64_t seed);        // least squares + weighted L1
Problem make_quartic(int n);                                 // sum x_i^4/4 + ||x||^2/2, optimum at 0

std::vector<Problem> builtin_problems();
std::vector<std::string> builtin_problem_names();
/// Resolve by short name ("logreg", "logsumexp", "lasso", "quartic");
/// n/m <= 0 pick the documented defaults. Throws std::invalid_argument
/// listing the available names on an unknown name.
Problem make_problem(const std::string& name, int n, int m, std::uint64_t seed);

struct LipschitzReport {
  int order = 0;
  double documented = 0.0;
  double max_ratio = 0.0;  // max ||D^d f(x)-D^d f(y)||_F / ||x-y|| over trials
  bool violated = false;
  int trials = 0;
};
/// Sample random pairs in the box [-10,10]^n and compare derivative
/// differences against the documented L_d, for every supported order.
std::vector<LipschitzReport> validate_lipschitz(const Problem& p, int trials,
                                                std::uint64_t seed = 42);

struct ReferenceSolution {
  Vec x;
  double objective = 0.0;
  int iterations = 0;
  double residual = 0.0;
};
/// Damped Newton for smooth problems; residual is the gradient norm.
ReferenceSolution reference_newton(const Problem& p, Vec x0, double grad_tol,
                                   int max_iter = 500);
/// Monotone FISTA with fixed step 1/L_1 and function restart; residual is
/// the prox-gradient mapping norm. Independent of the main solver stack.
ReferenceSolution reference_prox_gradient(const Problem& p, Vec x0, double tol,
                                          int max_iter = 2000000);

}  // namespace hotm
