#pragma once

// Approximate Tensor Subroutine: solve
//   min_y  f_x(y) + h(y) + ||y-x||^2 / (2 lambda)
// to the sigma-hat certificate
//   u in (grad f_x + eps-subdiff h)(y),
//   ||lambda u + y - x||^2 + 2 lambda eps <= sigma_hat^2 ||y-x||^2,
// with specialized solvers per order and a Bregman gradient scheme for d=3.

#include "hotm/oracle.hpp"
#include "hotm/taylor_model.hpp"

#include <stdexcept>
#include <vector>

namespace hotm {

struct AtsConfig {
  double sigma_hat = 0.1;     // certificate parameter, in [0,1)
  int max_inner = 10000;
  double kappa = 1.2;         // d=3 relative-smoothness ratio, must be > 1
  double tau_tol = 1e-12;     // univariate tau-solve tolerance
  double accept_slack = 0.0;  // widens only the inner acceptance test; fault-injection hook
  std::vector<double>* d3_objective_log = nullptr;  // test observer for the Bregman descent
};

struct ApproxSolution {
  Vec y;
  Vec u;
  double eps = 0.0;
  double residual_ratio = 0.0;  // sqrt(||lambda u + y-x||^2 + 2 lambda eps) / ||y-x||
  int inner_iterations = 0;
};

/// Thrown when an inner solver exhausts max_inner without a certificate.
class AtsFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sqrt(||lambda u + y - x||^2 + 2 lambda eps) / ||y - x||; 0 when both
/// numerator and denominator vanish, +inf when only the denominator does.
double certificate_ratio(const Vec& y, const Vec& u, double eps, double lambda, const Vec& x);

/// The Definition-2.2 inequality, exact (non-strict at the boundary).
bool certify(const Vec& y, const Vec& u, double eps, double lambda, const Vec& x,
             double sigma_hat);

// Per-order solvers. All return eps = 0 solutions; composite h is handled
// in closed form for d=1 and by solve_generic for d=2,3.
ApproxSolution solve_d1(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                        const Vec& x, const AtsConfig& cfg);
ApproxSolution solve_d2(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                        const Vec& x, const AtsConfig& cfg);
ApproxSolution solve_d3(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                        const Vec& x, const AtsConfig& cfg);
/// Prox-gradient on the (1/lambda)-strongly-convex model with backtracking;
/// works for any d <= 3 and any h, certified-on-success.
ApproxSolution solve_generic(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                             const Vec& x, const AtsConfig& cfg);
/// Dispatch: d=1 closed form; d=2/3 specialized when h = 0, generic otherwise.
ApproxSolution ats_solve(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                         const Vec& x, const AtsConfig& cfg);

struct TauResult {
  double tau = 0.0;
  Vec z;
  int iterations = 0;
};

/// Minimize a^T z + z^T A z / 2 + gamma ||z||^4 / 4 for PSD A through the
/// univariate dual min_{tau>0} gamma tau^2 + a^T (2 gamma tau I + A)^{-1} a / 2.
/// At the solution ||z||^2 = 2 tau holds to tol and z is the minimizer.
TauResult solve_tau(const SymMatrix& a_mat, const Vec& a, double gamma, double tol);
/// Same, reusing a cached eigendecomposition of A (eigvals/eigvecs).
TauResult solve_tau_spectral(const Vec& eigvals, const Mat& eigvecs, const Vec& a,
                             double gamma, double tol);

/// Diagnostic modified residual lambda * || (I + lambda(grad f_x + dh))^{-1}(x) - x ||^{d-1},
/// computed with a high-accuracy inner solve.
double psi_residual(const TaylorModel& m, const NonsmoothTerm& h, double lambda, const Vec& x);

}  // namespace hotm
