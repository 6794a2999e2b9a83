#pragma once

#include "hotm/oracle.hpp"
#include "hotm/trace.hpp"

#include <string>

namespace hotm {

/// Locale-independent shortest-17-significant-digit formatting; round-trips
/// through parsing exactly.
std::string format_double(double v);

/// F* reference for gap columns: the known optimum when available,
/// otherwise the best objective seen in the trace.
double resolve_f_star(const RunTrace& t, const Problem& p);

/// Stable trace schema, one row per outer iteration:
/// k,A_k,lambda_k,beta_k,bisect_steps,ats_inner,norm_v,eps,F_gap,step_norm,residual_ratio
std::string trace_csv_string(const RunTrace& t, double f_star);
void write_trace_csv(const std::string& path, const RunTrace& t, double f_star);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
/// Least-squares fit of log(F(y_k) - F*) against log k over records with
/// k in [k_lo, k_hi]. Throws std::domain_error on nonpositive gaps in range
/// or fewer than two points.
RateFit fit_rate(const RunTrace& t, double f_star, int k_lo, int k_hi);

}  // namespace hotm
