#include "hotm/ahpe.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hotm {

namespace {
constexpr double kFactorial[4] = {1.0, 1.0, 2.0, 6.0};

double slack(double rhs) { return 1e-10 * std::max(1.0, std::abs(rhs)); }
}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::MaxIter:
      return "max-iterations";
    case Termination::BisectFailed:
      return "bisection-failed";
    case Termination::NumericallyStationary:
      return "numerically-stationary";
    case Termination::Diverged:
      return "diverged";
  }
  return "unknown";
}

SolverConfig resolve_config(const Problem& p, SolverConfig c) {
  if (c.m_reg <= 0.0) {
    const double l = (c.d >= 1 && c.d <= 3) ? p.lipschitz(c.d) : 0.0;
    if (l <= 0.0)
      c.m_reg = 1.0;
    else if (c.d == 3 && p.h().is_zero())
      c.m_reg = 3.0 * c.ats.kappa * c.ats.kappa * l;
    else
      c.m_reg = l;
  }
  return c;
}

std::vector<std::string> validate_config(const SolverConfig& c, const Problem& p) {
  std::vector<std::string> bad;
  auto fail = [&bad](const std::string& s) { bad.push_back(s); };
  if (c.d < 1 || c.d > 3) fail("d must be in {1,2,3}");
  if (c.ats.sigma_hat < 0.0) fail("sigma_hat must be nonnegative");
  if (!(c.sigma_l > 0.0 && c.sigma_l < c.sigma_u && c.sigma_u < 1.0))
    fail("need 0 < sigma_l < sigma_u < 1");
  if (!(c.ats.sigma_hat + c.sigma_u < 1.0)) fail("need sigma_hat + sigma_u < 1");
  if (c.d >= 1 && c.d <= 3) {
    const double lhs = c.sigma_l * std::pow(1.0 + c.ats.sigma_hat, c.d - 1);
    const double rhs = c.sigma_u * std::pow(1.0 - c.ats.sigma_hat, c.d - 1);
    if (!(lhs < rhs)) fail("need sigma_l (1+sigma_hat)^{d-1} < sigma_u (1-sigma_hat)^{d-1}");
    if (c.m_reg > 0.0 && c.m_reg < p.lipschitz(c.d)) fail("need M >= L_d");
  }
  if (!(c.m_reg > 0.0)) fail("M must be positive (0 requests auto-resolution before validating)");
  if (!(c.rho_bar > 0.0 && c.rho_bar < 1.0)) fail("need 0 < rho_bar < 1");
  if (!(c.eps_bar > 0.0 && c.eps_bar < 1.0)) fail("need 0 < eps_bar < 1");
  if (c.max_outer < 0) fail("max_outer must be nonnegative");
  if (c.max_bisect < 1) fail("max_bisect must be positive");
  if (c.ats.max_inner < 1) fail("ats.max_inner must be positive");
  if (c.d == 3 && p.h().is_zero() && !(c.ats.kappa > 1.0)) fail("need kappa > 1 for d=3");
  return bad;
}

void validate_config_or_throw(const SolverConfig& c, const Problem& p) {
  const auto bad = validate_config(c, p);
  if (bad.empty()) return;
  std::ostringstream os;
  os << "invalid solver configuration:";
  for (const auto& s : bad) os << "\n  - " << s;
  throw std::invalid_argument(os.str());
}

double a_next(double a_total, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("a_next: lambda must be positive");
  if (a_total < 0.0) throw std::invalid_argument("a_next: A_k must be nonnegative");
  return 0.5 * (lambda + std::sqrt(lambda * lambda + 4.0 * lambda * a_total));
}

SolverState make_initial_state(const Problem& p, const Vec& x0) {
  SolverState s;
  s.x = x0;
  s.y = x0;
  s.v = p.h().min_norm_subgradient(x0, p.query(x0, 1).gradient);
  s.eps = 0.0;
  return s;
}

std::optional<IterRecord> solver_step(SolverState& s, const Problem& p, const SolverConfig& cfg,
                                      SearchStats* stats) {
  if (s.terminated) return std::nullopt;
  if (s.v.norm() <= cfg.rho_bar && s.eps <= cfg.eps_bar) {
    s.terminated = true;
    s.term = Termination::Converged;
    return std::nullopt;
  }

  SearchStats local;
  BisectionOutcome out = search(p, s.x, s.y, s.a_total, cfg, &local);
  if (stats) {
    stats->steps += local.steps;
    stats->ats_inner += local.ats_inner;
    stats->oracle_full += local.oracle_full;
    stats->oracle_grad += local.oracle_grad;
  }
  if (std::holds_alternative<BisectFailed>(out)) {
    s.terminated = true;
    s.term = Termination::BisectFailed;
    return std::nullopt;
  }
  const bool is_large = std::holds_alternative<LargeStep>(out);
  AcceptedStep acc = is_large ? static_cast<AcceptedStep&&>(std::get<LargeStep>(out))
                              : static_cast<AcceptedStep&&>(std::get<NearOptimal>(out));

  const double a = a_next(s.a_total, acc.lambda);
  const double a_new = s.a_total + a;
  // x~ recomputed from the A-HPE convex combination must match the
  // bisection's anchor: beta = a/(A_k + a) by the lambda(beta) identity.
  const Vec x_tilde_check = (s.a_total / a_new) * s.y + (a / a_new) * s.x;
  if ((x_tilde_check - acc.x_tilde).norm() > 1e-10 * (1.0 + acc.x_tilde.norm()))
    throw std::logic_error("solver_step: x~ mismatch between Eq-14 and the bisection anchor");

  IterRecord rec;
  rec.k = s.k + 1;
  rec.a_total = a_new;
  rec.a_incr = a;
  rec.lambda = acc.lambda;
  rec.beta = acc.beta;
  rec.bisect_steps = local.steps;
  rec.ats_inner = local.ats_inner;
  rec.norm_v = acc.v.norm();
  rec.eps = acc.sol.eps;
  rec.f_y = acc.f_y_smooth + p.h().evaluate(acc.sol.y);
  rec.step_norm = (acc.sol.y - acc.x_tilde).norm();
  rec.residual_ratio = acc.sol.residual_ratio;
  rec.large_step = is_large;
  rec.prop32_lhs = (acc.lambda * acc.v + acc.sol.y - acc.x_tilde).squaredNorm() +
                   2.0 * acc.lambda * acc.sol.eps;
  rec.x_tilde = acc.x_tilde;

  s.x -= a * acc.v;
  s.y = acc.sol.y;
  s.v = acc.v;
  s.eps = acc.sol.eps;
  s.a_total = a_new;
  s.k += 1;

  rec.x_after = s.x;
  rec.y = s.y;
  rec.v = s.v;

  if (rec.step_norm <= 1e-14) {
    // below the floating-point floor the large-step condition is meaningless
    s.terminated = true;
    s.term = Termination::NumericallyStationary;
  }
  return rec;
}

RunTrace run(const Problem& p, const Vec& x0, const SolverConfig& cfg_in) {
  const SolverConfig cfg = resolve_config(p, cfg_in);
  validate_config_or_throw(cfg, p);

  RunTrace t;
  t.problem = p.name();
  t.method = "optimal-d" + std::to_string(cfg.d);
  t.config = cfg;
  t.x0 = x0;

  SolverState s = make_initial_state(p, x0);
  SearchStats agg;
  agg.oracle_grad += 1;  // the v_0 query
  while (!s.terminated && s.k < cfg.max_outer) {
    auto rec = solver_step(s, p, cfg, &agg);
    if (rec) t.records.push_back(std::move(*rec));
  }
  if (!s.terminated)
    s.term = (s.v.norm() <= cfg.rho_bar && s.eps <= cfg.eps_bar) ? Termination::Converged
                                                                 : Termination::MaxIter;
  t.termination = s.term;
  t.y_final = s.y;
  t.oracle_full = agg.oracle_full;
  t.oracle_grad = agg.oracle_grad;
  return t;
}

RunTrace run(const Problem& p, const SolverConfig& cfg) {
  return run(p, p.default_start(), cfg);
}

double theorem_rate_bound(int d, double sigma_hat, double sigma_l, double sigma_u, double l_d,
                          double m_reg, double dist, int k) {
  const double sigma = sigma_hat + sigma_u;
  const double expo = 0.5 * (3.0 * d + 1.0);
  return std::pow(0.5 * (d + 1.0), expo) * std::pow(2.0, d) /
         (std::pow(1.0 - sigma * sigma, 0.5 * (d - 1.0)) * kFactorial[d] * sigma_l) *
         std::pow(dist, d + 1.0) * (l_d + m_reg) * std::pow(double(k), -expo);
}

PotentialReport check_potential(const RunTrace& t, const Problem& p) {
  const auto& opt = p.known_optimum();
  if (!opt) throw std::invalid_argument("check_potential: problem has no known optimum");
  const Vec& xs = opt->x_star;
  const double fs = opt->f_star;

  PotentialReport rep;
  rep.dist = (t.x0 - xs).norm();
  rep.sigma = t.config.sigma();
  const double d2 = rep.dist * rep.dist;
  const double one_minus_s2 = 1.0 - rep.sigma * rep.sigma;

  double energy = 0.0;
  double sqrt_sum = 0.0;
  for (const IterRecord& r : t.records) {
    energy += r.a_total / r.lambda * r.step_norm * r.step_norm;
    sqrt_sum += std::sqrt(r.lambda);

    PotentialRow row;
    row.k = r.k;
    row.lhs = 0.5 * (xs - r.x_after).squaredNorm() + r.a_total * (r.f_y - fs) +
              0.5 * one_minus_s2 * energy;
    row.ok_potential = row.lhs <= 0.5 * d2 + slack(0.5 * d2);
    row.energy_sum = energy;
    row.ok_energy = energy <= d2 / one_minus_s2 + slack(d2 / one_minus_s2);
    row.rhs_quarter = 0.25 * sqrt_sum * sqrt_sum;
    row.ok_quarter = r.a_total >= row.rhs_quarter - slack(row.rhs_quarter);
    rep.all_ok = rep.all_ok && row.ok_potential && row.ok_energy && row.ok_quarter;
    rep.rows.push_back(row);
  }
  return rep;
}

RateReport check_rate_bound(const RunTrace& t, const Problem& p) {
  const auto& opt = p.known_optimum();
  if (!opt) throw std::invalid_argument("check_rate_bound: problem has no known optimum");
  const int d = t.config.d;
  const double l_d = p.lipschitz(d);
  const double m = t.config.m_reg;
  const double fs = opt->f_star;

  RateReport rep;
  const double dist = (t.x0 - opt->x_star).norm();
  rep.recursion_applicable = d >= 2;
  const double sigma = t.config.sigma();
  const double alpha_lo = kFactorial[d] * t.config.sigma_l / (l_d + m);
  if (d >= 2)
    rep.c_const = dist * dist / (1.0 - sigma * sigma) * std::pow(alpha_lo, -2.0 / (d - 1));
  rep.a_lower_bound = kFactorial[d] * t.config.sigma_l /
                      ((l_d + m) * std::pow(2.0 / std::sqrt(1.0 - sigma * sigma) + 2.0, d - 1) *
                       std::pow(std::max(dist, 1e-300), d - 1));

  // The bound and the recursion presume the two-sided condition at every
  // iteration, so they apply to the large-step prefix of the run.
  int prefix = 0;
  while (prefix < int(t.records.size()) && t.records[prefix].large_step) ++prefix;
  rep.checked_prefix = prefix;

  const double q = d >= 2 ? (3.0 * d + 1.0) / (d - 1.0) : 0.0;
  const double pp = (3.0 * d + 1.0) / (2.0 * d + 2.0);
  double sum_a_pow = 0.0;
  for (int i = 0; i < prefix; ++i) {
    const IterRecord& r = t.records[i];
    RateRow row;
    row.k = r.k;
    row.gap = r.f_y - fs;
    row.bound = theorem_rate_bound(d, t.config.sigma_hat(), t.config.sigma_l, t.config.sigma_u,
                                   l_d, m, dist, r.k);
    row.ok_bound = row.gap <= row.bound + slack(row.bound);
    if (d >= 2) {
      sum_a_pow += std::pow(r.a_total, 1.0 / q);
      row.recursion_rhs = 0.25 * std::pow(rep.c_const, -2.0 * pp / q) * std::pow(sum_a_pow, 2.0 * pp);
      row.ok_recursion = r.a_total >= row.recursion_rhs * (1.0 - 1e-10);
    }
    if (r.a_total < rep.a_lower_bound - slack(rep.a_lower_bound)) rep.ok_lower = false;
    rep.all_ok = rep.all_ok && row.ok_bound && row.ok_recursion;
    rep.rows.push_back(row);
  }
  rep.all_ok = rep.all_ok && rep.ok_lower;
  return rep;
}

}  // namespace hotm
