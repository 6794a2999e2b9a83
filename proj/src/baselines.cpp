#include "hotm/baselines.hpp"

#include "hotm/ahpe.hpp"
#include "hotm/taylor_model.hpp"

#include <cmath>
#include <stdexcept>

namespace hotm {

namespace {

constexpr double kBasicTensorLambda = 1e12;  // "no prox" surrogate weight

RunTrace make_trace(const Problem& p, const Vec& x0, const char* method, int d, double m_reg) {
  RunTrace t;
  t.problem = p.name();
  t.method = method;
  t.config.d = d;
  t.config.m_reg = m_reg;
  t.x0 = x0;
  return t;
}

bool diverged(double f, double f0) { return f > f0 + 10.0 * (std::abs(f0) + 1.0); }

IterRecord scalar_record(int k, double f, double norm_v, double step_norm, double step) {
  IterRecord r;
  r.k = k;
  r.lambda = step;
  r.f_y = f;
  r.norm_v = norm_v;
  r.step_norm = step_norm;
  return r;
}

}  // namespace

RunTrace run_gd(const Problem& p, const Vec& x0, const BaselineConfig& cfg) {
  const double t_step = cfg.step > 0.0 ? cfg.step : 1.0 / p.lipschitz(1);
  RunTrace tr = make_trace(p, x0, "gd", 1, 0.0);
  Vec x = x0;
  const double f0 = p.objective(x0);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vec g = p.query(x, 1).gradient;
    ++tr.oracle_grad;
    const Vec x_next = p.h().prox(x - t_step * g, t_step);
    const double res = (x - x_next).norm() / t_step;
    x = x_next;
    const double f = p.objective(x);
    tr.records.push_back(scalar_record(k, f, res, (x - x0).norm(), t_step));
    if (diverged(f, f0)) {
      tr.termination = Termination::Diverged;
      tr.y_final = x;
      return tr;
    }
    if (res <= cfg.tol) {
      tr.termination = Termination::Converged;
      tr.y_final = x;
      return tr;
    }
  }
  tr.termination = Termination::MaxIter;
  tr.y_final = x;
  return tr;
}

RunTrace run_agd(const Problem& p, const Vec& x0, const BaselineConfig& cfg) {
  const double t_step = cfg.step > 0.0 ? cfg.step : 1.0 / p.lipschitz(1);
  RunTrace tr = make_trace(p, x0, "agd", 1, 0.0);
  Vec x = x0, z = x0;
  double theta = 1.0;
  const double f0 = p.objective(x0);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vec g = p.query(z, 1).gradient;
    ++tr.oracle_grad;
    const Vec x_next = p.h().prox(z - t_step * g, t_step);
    const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
    z = x_next + ((theta - 1.0) / theta_next) * (x_next - x);
    const double res = (x - x_next).norm() / t_step;
    x = x_next;
    theta = theta_next;
    const double f = p.objective(x);
    tr.records.push_back(scalar_record(k, f, res, (x - x0).norm(), t_step));
    if (diverged(f, f0)) {
      tr.termination = Termination::Diverged;
      tr.y_final = x;
      return tr;
    }
    const Vec gx = p.query(x, 1).gradient;
    ++tr.oracle_grad;
    const double stat = (x - p.h().prox(x - t_step * gx, t_step)).norm() / t_step;
    if (stat <= cfg.tol) {
      tr.termination = Termination::Converged;
      tr.y_final = x;
      return tr;
    }
  }
  tr.termination = Termination::MaxIter;
  tr.y_final = x;
  return tr;
}

RunTrace run_basic_tensor(const Problem& p, const Vec& x0, const BaselineConfig& cfg) {
  const int d = cfg.d;
  double m_reg = cfg.m_reg;
  if (m_reg <= 0.0) {
    SolverConfig tmp;
    tmp.d = d;
    tmp.ats = cfg.ats;
    m_reg = resolve_config(p, tmp).m_reg;
  }
  if (m_reg < p.lipschitz(d))
    throw std::invalid_argument("run_basic_tensor: need M >= L_d for the descent property");

  RunTrace tr = make_trace(p, x0, ("basic-d" + std::to_string(d)).c_str(), d, m_reg);
  Vec x = x0;
  const double f0 = p.objective(x0);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const DerivativeBundle bundle = p.query(x, d);
    ++tr.oracle_full;
    const TaylorModel model(x, bundle, m_reg, d);
    const ApproxSolution sol = ats_solve(model, p.h(), kBasicTensorLambda, x, cfg.ats);
    const double step_norm = (sol.y - x).norm();
    x = sol.y;
    const Vec gx = p.query(x, 1).gradient;
    ++tr.oracle_grad;
    const double res = p.h().min_norm_subgradient(x, gx).norm();
    const double f = p.objective(x);

    IterRecord rec = scalar_record(k, f, res, step_norm, kBasicTensorLambda);
    rec.ats_inner = sol.inner_iterations;
    rec.residual_ratio = sol.residual_ratio;
    tr.records.push_back(std::move(rec));
    if (diverged(f, f0)) {
      tr.termination = Termination::Diverged;
      tr.y_final = x;
      return tr;
    }
    if (res <= cfg.tol || step_norm <= 1e-15) {
      tr.termination = Termination::Converged;
      tr.y_final = x;
      return tr;
    }
  }
  tr.termination = Termination::MaxIter;
  tr.y_final = x;
  return tr;
}

RunTrace run_baseline(const Problem& p, const Vec& x0, const BaselineConfig& cfg) {
  switch (cfg.method) {
    case BaselineMethod::GD:
      return run_gd(p, x0, cfg);
    case BaselineMethod::AGD:
      return run_agd(p, x0, cfg);
    case BaselineMethod::BasicTensor:
      return run_basic_tensor(p, x0, cfg);
  }
  throw std::invalid_argument("run_baseline: unknown method");
}

}  // namespace hotm
