#include "hotm/bisection.hpp"

#include "hotm/taylor_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hotm {

namespace {

constexpr double kFactorial[4] = {1.0, 1.0, 2.0, 6.0};

struct Probe {
  ApproxSolution sol;
  Vec v;
  double f_y = 0.0;
  double product = 0.0;
};

Probe probe_lambda(const Problem& p, const TaylorModel& model, double lambda,
                   const SolverConfig& cfg, SearchStats& stats) {
  Probe pr;
  pr.sol = ats_solve(model, p.h(), lambda, model.anchor(), cfg.ats);
  stats.ats_inner += pr.sol.inner_iterations;
  const DerivativeBundle by = p.query(pr.sol.y, 1);
  ++stats.oracle_grad;
  pr.v = by.gradient - model.gradient(pr.sol.y) + pr.sol.u;
  pr.f_y = by.value;
  pr.product = large_step_product(lambda, (pr.sol.y - model.anchor()).norm(), cfg.d);
  return pr;
}

bool near_optimal(const Probe& pr, const SolverConfig& cfg) {
  return pr.v.norm() <= cfg.rho_bar && pr.sol.eps <= cfg.eps_bar;
}

AcceptedStep make_accept(double lambda, double beta, const Vec& x_tilde, Probe&& pr) {
  AcceptedStep a;
  a.lambda = lambda;
  a.beta = beta;
  a.x_tilde = x_tilde;
  a.sol = std::move(pr.sol);
  a.v = std::move(pr.v);
  a.f_y_smooth = pr.f_y;
  return a;
}

}  // namespace

double lambda_of_beta(double a_total, double beta) {
  if (beta < 0.0 || beta > 1.0)
    throw std::invalid_argument("lambda_of_beta: beta outside [0,1]");
  if (beta == 1.0) return std::numeric_limits<double>::infinity();
  return a_total * beta * beta / (1.0 - beta);
}

double beta_of_lambda(double a_total, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("beta_of_lambda: lambda must be >= 0");
  if (a_total <= 0.0) throw std::invalid_argument("beta_of_lambda: A_k must be positive");
  if (lambda == 0.0) return 0.0;
  return 2.0 * lambda / (std::sqrt(lambda * lambda + 4.0 * lambda * a_total) + lambda);
}

Vec x_of_beta(double beta, const Vec& x_k, const Vec& y_k) {
  if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("x_of_beta: beta outside [0,1]");
  return (1.0 - beta) * y_k + beta * x_k;
}

double large_step_product(double lambda, double step_norm, int d) {
  switch (d) {
    case 1:
      return lambda;
    case 2:
      return lambda * step_norm;
    case 3:
      return lambda * step_norm * step_norm;
    default:
      throw std::invalid_argument("large_step_product: d must be in {1,2,3}");
  }
}

BisectionOutcome search(const Problem& p, const Vec& x_k, const Vec& y_k, double a_total,
                        const SolverConfig& cfg, SearchStats* stats_out) {
  SearchStats local;
  SearchStats& stats = stats_out ? *stats_out : local;
  const int d = cfg.d;
  const double l_d = p.lipschitz(d);
  const double m = cfg.m_reg;

  BisectionState st;
  st.a_total = a_total;
  st.alpha_lo = kFactorial[d] * cfg.sigma_l / (l_d + m);
  st.alpha_hi = kFactorial[d] * cfg.sigma_u / (l_d + m);

  if (a_total <= 0.0) {
    // First iteration: lambda(beta) degenerates, so bisect on lambda itself
    // with the anchor frozen at x_k (x_0 = y_0). One oracle query serves
    // every probe.
    const DerivativeBundle bundle = p.query(x_k, d);
    ++stats.oracle_full;
    const TaylorModel model(x_k, bundle, m, d);

    double lo = 1e-12;
    double hi = std::numeric_limits<double>::quiet_NaN();
    double lambda = 1.0;
    while (st.steps < cfg.max_bisect) {
      Probe pr;
      try {
        pr = probe_lambda(p, model, lambda, cfg, stats);
      } catch (const AtsFailure& e) {
        st.steps = stats.steps;
        return BisectFailed{st, std::string("ATS failed at lambda=") + std::to_string(lambda) +
                                    ": " + e.what()};
      }
      ++st.steps;
      ++stats.steps;
      if (near_optimal(pr, cfg))
        return NearOptimal{make_accept(lambda, 1.0, x_k, std::move(pr))};
      if (pr.product >= st.alpha_lo && pr.product <= st.alpha_hi)
        return LargeStep{make_accept(lambda, 1.0, x_k, std::move(pr))};
      if (pr.product > st.alpha_hi)
        hi = lambda;
      else
        lo = lambda;
      if (std::isnan(hi)) {
        lambda *= 2.0;  // still hunting for an upper bracket
        if (lambda > 1e300)
          return BisectFailed{st, "lambda doubling exhausted without bracketing"};
      } else {
        lambda = std::sqrt(lo * hi);  // geometric midpoint
      }
    }
    return BisectFailed{st, "max bisection steps exceeded (first iteration)"};
  }

  while (st.steps < cfg.max_bisect) {
    const double beta = 0.5 * (st.beta_lo + st.beta_hi);
    const double lambda = lambda_of_beta(a_total, beta);
    const Vec x_beta = x_of_beta(beta, x_k, y_k);
    const DerivativeBundle bundle = p.query(x_beta, d);
    ++stats.oracle_full;
    const TaylorModel model(x_beta, bundle, m, d);
    Probe pr;
    try {
      pr = probe_lambda(p, model, lambda, cfg, stats);
    } catch (const AtsFailure& e) {
      st.steps = stats.steps;
      return BisectFailed{st, std::string("ATS failed at beta=") + std::to_string(beta) + ": " +
                                  e.what()};
    }
    ++st.steps;
    ++stats.steps;
    if (near_optimal(pr, cfg))
      return NearOptimal{make_accept(lambda, beta, x_beta, std::move(pr))};
    if (pr.product >= st.alpha_lo && pr.product <= st.alpha_hi)
      return LargeStep{make_accept(lambda, beta, x_beta, std::move(pr))};
    if (pr.product > st.alpha_hi)
      st.beta_hi = beta;
    else
      st.beta_lo = beta;
  }
  return BisectFailed{st, "max bisection steps exceeded"};
}

std::vector<StepCountRow> step_count_report(const std::vector<RunTrace>& traces) {
  std::vector<StepCountRow> rows;
  rows.reserve(traces.size());
  for (const RunTrace& t : traces) {
    StepCountRow r;
    r.problem = t.problem;
    r.method = t.method;
    r.log2_inv_rho = std::log2(1.0 / t.config.rho_bar);
    r.log2_inv_eps = std::log2(1.0 / t.config.eps_bar);
    double sum = 0.0;
    for (const IterRecord& rec : t.records) {
      r.max_steps = std::max(r.max_steps, rec.bisect_steps);
      sum += rec.bisect_steps;
    }
    r.mean_steps = t.records.empty() ? 0.0 : sum / double(t.records.size());
    rows.push_back(std::move(r));
  }
  return rows;
}

double lambda_bar_threshold(const SolverConfig& cfg, const Problem& p) {
  const int d = cfg.d;
  const double l_d = p.lipschitz(d);
  const double m = cfg.m_reg > 0 ? cfg.m_reg : l_d;
  const double alpha_lo = kFactorial[d] * cfg.sigma_l / (l_d + m);
  const double sigma = cfg.sigma();
  const double first = std::pow(alpha_lo, 1.0 / d) *
                       std::pow((1.0 + cfg.sigma_hat() + (l_d + m) / kFactorial[d] * alpha_lo) /
                                    cfg.rho_bar,
                                1.0 - 1.0 / d);
  if (d == 1) return first;
  const double second = std::pow(
      sigma * sigma * std::pow(alpha_lo, 2.0 / (d - 1)) / (2.0 * cfg.eps_bar),
      double(d - 1) / double(d + 1));
  return std::max(first, second);
}

}  // namespace hotm
