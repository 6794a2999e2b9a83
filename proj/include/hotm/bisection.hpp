#pragma once

// Bisection on beta with the lambda(beta) = A_k beta^2/(1-beta)
// reparameterization: find lambda and a certified subproblem solution
// satisfying either the two-sided large-step condition
//   d! sigma_l/(L_d+M) <= lambda ||y - x_beta||^{d-1} <= d! sigma_u/(L_d+M)
// or the near-optimality residual test ||v|| <= rho_bar, eps <= eps_bar.

#include "hotm/ats.hpp"
#include "hotm/oracle.hpp"
#include "hotm/solver_config.hpp"
#include "hotm/trace.hpp"

#include <string>
#include <variant>
#include <vector>

namespace hotm {

/// lambda(beta) = A_k beta^2 / (1 - beta); +inf at beta = 1.
double lambda_of_beta(double a_total, double beta);
/// Inverse map on lambda >= 0, computed in the cancellation-free form
/// 2 lambda / (sqrt(lambda^2 + 4 lambda A_k) + lambda).
double beta_of_lambda(double a_total, double lambda);
/// x_beta = (1-beta) y_k + beta x_k.
Vec x_of_beta(double beta, const Vec& x_k, const Vec& y_k);
/// lambda * ||step||^{d-1}; the d=1 exponent 0 counts as 1 even at step 0.
double large_step_product(double lambda, double step_norm, int d);

struct BisectionState {
  double beta_lo = 0.0;
  double beta_hi = 1.0;
  double a_total = 0.0;
  double alpha_lo = 0.0;
  double alpha_hi = 0.0;
  int steps = 0;
};

struct AcceptedStep {
  double lambda = 0.0;
  double beta = 0.0;
  Vec x_tilde;
  ApproxSolution sol;
  Vec v;               // grad f(y) - grad f_x(y) + u
  double f_y_smooth = 0.0;
};
struct LargeStep : AcceptedStep {};
struct NearOptimal : AcceptedStep {};
struct BisectFailed {
  BisectionState state;
  std::string reason;
};
using BisectionOutcome = std::variant<LargeStep, NearOptimal, BisectFailed>;

struct SearchStats {
  int steps = 0;
  int ats_inner = 0;
  int oracle_full = 0;
  int oracle_grad = 0;
};

/// One outer-iteration search. A_k = 0 (the first iteration, where the
/// beta map degenerates) bisects geometrically on lambda directly with the
/// anchor frozen at x_k.
BisectionOutcome search(const Problem& p, const Vec& x_k, const Vec& y_k, double a_total,
                        const SolverConfig& cfg, SearchStats* stats = nullptr);

struct StepCountRow {
  std::string problem;
  std::string method;
  int max_steps = 0;
  double mean_steps = 0.0;
  double log2_inv_rho = 0.0;
  double log2_inv_eps = 0.0;
};
std::vector<StepCountRow> step_count_report(const std::vector<RunTrace>& traces);

/// Lemma-4.4 style threshold on lambda; diagnostic only, never branched on.
double lambda_bar_threshold(const SolverConfig& cfg, const Problem& p);

}  // namespace hotm
