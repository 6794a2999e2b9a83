#pragma once

#include "hotm/multilinear.hpp"
#include "hotm/solver_config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hotm {

enum class Termination { Converged, MaxIter, BisectFailed, NumericallyStationary, Diverged };
const char* to_string(Termination t);

/// One accepted outer iteration. The scalar fields form the CSV trace row;
/// the vectors are kept in memory for the certification checks.
struct IterRecord {
  int k = 0;
  double a_total = 0.0;  // A_k
  double a_incr = 0.0;   // a_k
  double lambda = 0.0;
  double beta = 0.0;
  int bisect_steps = 0;
  int ats_inner = 0;
  double norm_v = 0.0;
  double eps = 0.0;
  double f_y = 0.0;       // F(y_k)
  double step_norm = 0.0; // ||y_k - x~_{k-1}||
  double residual_ratio = 0.0;
  bool large_step = true;   // Eq-13 branch (false: residual branch)
  double prop32_lhs = 0.0;  // ||lambda v + y - x~||^2 + 2 lambda eps
  Vec x_after;
  Vec y;
  Vec v;
  Vec x_tilde;
};

struct RunTrace {
  std::string problem;
  std::string method;
  SolverConfig config;
  Vec x0;
  std::vector<IterRecord> records;
  Termination termination = Termination::MaxIter;
  Vec y_final;
  std::optional<double> dist_opt;  // D = ||x0 - x*|| when the optimum is known
  long oracle_full = 0;            // order-d queries (one per bisection step)
  long oracle_grad = 0;            // gradient-only queries at candidate points
};

}  // namespace hotm
