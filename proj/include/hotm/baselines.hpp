#pragma once

// Reference methods for rate comparison: proximal gradient descent,
// accelerated proximal gradient, and the basic (non-accelerated) d-th order
// tensor method. All emit the shared RunTrace schema.

#include "hotm/ats.hpp"
#include "hotm/oracle.hpp"
#include "hotm/trace.hpp"

namespace hotm {

enum class BaselineMethod { GD, AGD, BasicTensor };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::GD;
  double step = 0.0;  // <= 0: use 1/L_1
  int max_iter = 20000;
  double tol = 1e-10;  // composite stationarity residual
  int d = 2;           // BasicTensor order
  double m_reg = 0.0;  // BasicTensor M; 0 resolves like the main solver
  AtsConfig ats{};
};

RunTrace run_gd(const Problem& p, const Vec& x0, const BaselineConfig& cfg);
RunTrace run_agd(const Problem& p, const Vec& x0, const BaselineConfig& cfg);
/// x_{t+1} = argmin f_{x_t}(y) + h(y), realized as ATS with a negligible
/// prox weight (lambda = 1e12). Monotone descent when M >= L_d.
RunTrace run_basic_tensor(const Problem& p, const Vec& x0, const BaselineConfig& cfg);

RunTrace run_baseline(const Problem& p, const Vec& x0, const BaselineConfig& cfg);

}  // namespace hotm
