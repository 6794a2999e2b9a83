#pragma once

// The optimal tensor method: A-HPE bookkeeping around the bisection search,
// with a full per-iteration trace and certification checks.

#include "hotm/bisection.hpp"
#include "hotm/oracle.hpp"
#include "hotm/solver_config.hpp"
#include "hotm/trace.hpp"

#include <optional>
#include <vector>

namespace hotm {

/// Positive root of a^2 - lambda a - lambda A_k = 0, so that
/// lambda = a^2 / (A_k + a).
double a_next(double a_total, double lambda);

struct SolverState {
  int k = 0;
  double a_total = 0.0;  // A_k
  Vec x;
  Vec y;
  Vec v;
  double eps = 0.0;
  bool terminated = false;
  Termination term = Termination::MaxIter;
};

SolverState make_initial_state(const Problem& p, const Vec& x0);

/// One outer iteration (STEPs 2-4). Returns nothing when the stop test fired
/// or the bisection failed; the state's term field says which.
std::optional<IterRecord> solver_step(SolverState& s, const Problem& p, const SolverConfig& cfg,
                                      SearchStats* stats = nullptr);

RunTrace run(const Problem& p, const Vec& x0, const SolverConfig& cfg);
RunTrace run(const Problem& p, const SolverConfig& cfg);  // from the problem's default start

/// Closed-form value of the worst-case bound
///   F(y_k) - F* <= ((d+1)/2)^{(3d+1)/2} 2^d / ((1-sigma^2)^{(d-1)/2} d! sigma_l)
///                  * D^{d+1} (L_d + M) k^{-(3d+1)/2}.
double theorem_rate_bound(int d, double sigma_hat, double sigma_l, double sigma_u, double l_d,
                          double m_reg, double dist, int k);

struct PotentialRow {
  int k = 0;
  double lhs = 0.0;  // potential value, bounded by D^2/2
  bool ok_potential = true;
  double energy_sum = 0.0;  // sum A_j/lambda_j ||y_j - x~_{j-1}||^2
  bool ok_energy = true;
  double rhs_quarter = 0.0;  // (sum sqrt(lambda_j))^2 / 4
  bool ok_quarter = true;
};
struct PotentialReport {
  bool all_ok = true;
  double dist = 0.0;
  double sigma = 0.0;
  std::vector<PotentialRow> rows;
};
/// Potential inequality, accumulated step energy bound and the A_k growth
/// bound, evaluated from the trace; requires a known optimum.
PotentialReport check_potential(const RunTrace& t, const Problem& p);

struct RateRow {
  int k = 0;
  double gap = 0.0;
  double bound = 0.0;
  bool ok_bound = true;
  double recursion_rhs = 0.0;
  bool ok_recursion = true;
};
struct RateReport {
  bool all_ok = true;
  bool recursion_applicable = false;  // the recursion exponent diverges at d=1
  double c_const = 0.0;
  double a_lower_bound = 0.0;
  bool ok_lower = true;
  int checked_prefix = 0;  // bounds apply to the large-step prefix of the run
  std::vector<RateRow> rows;
};
RateReport check_rate_bound(const RunTrace& t, const Problem& p);

}  // namespace hotm
