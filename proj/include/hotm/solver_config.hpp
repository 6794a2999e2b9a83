#pragma once

#include "hotm/ats.hpp"
#include "hotm/oracle.hpp"

#include <string>
#include <vector>

namespace hotm {

/// Parameters of the optimal tensor method. The defaults satisfy the
/// step-1 constraints with wide margins for every d in {1,2,3}.
struct SolverConfig {
  int d = 2;
  double sigma_l = 0.2;
  double sigma_u = 0.8;
  double m_reg = 0.0;  // M; 0 resolves to L_d (3 kappa^2 L_3 for d=3 smooth, 1 if L_d = 0)
  double rho_bar = 1e-6;
  double eps_bar = 1e-9;
  int max_outer = 200;
  int max_bisect = 200;
  AtsConfig ats{};

  double sigma_hat() const { return ats.sigma_hat; }
  double sigma() const { return ats.sigma_hat + sigma_u; }
};

/// Fill m_reg when left at 0, per problem and order.
SolverConfig resolve_config(const Problem& p, SolverConfig c);

/// Every violated constraint, one message each; empty means valid.
std::vector<std::string> validate_config(const SolverConfig& c, const Problem& p);
void validate_config_or_throw(const SolverConfig& c, const Problem& p);

}  // namespace hotm
