#include "hotm/ats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hotm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool accepts(double ratio, const AtsConfig& cfg) {
  return ratio <= cfg.sigma_hat + cfg.accept_slack;
}

ApproxSolution stationary_anchor(const Vec& x, int n) {
  ApproxSolution s;
  s.y = x;
  s.u = Vec::Zero(n);
  return s;
}

}  // namespace

double certificate_ratio(const Vec& y, const Vec& u, double eps, double lambda, const Vec& x) {
  const double num_sq = (lambda * u + y - x).squaredNorm() + 2.0 * lambda * eps;
  const double den = (y - x).norm();
  if (den == 0.0) return num_sq == 0.0 ? 0.0 : kInf;
  return std::sqrt(num_sq) / den;
}

bool certify(const Vec& y, const Vec& u, double eps, double lambda, const Vec& x,
             double sigma_hat) {
  require(eps >= 0.0, "certify: eps must be nonnegative");
  require(lambda > 0.0, "certify: lambda must be positive");
  const double lhs = (lambda * u + y - x).squaredNorm() + 2.0 * lambda * eps;
  const double rhs = sigma_hat * sigma_hat * (y - x).squaredNorm();
  return lhs <= rhs;
}

// ---------------------------------------------------------------------------
// d = 1: the model-plus-prox objective is a perfectly conditioned quadratic,
// so one prox evaluation at x - t g with t = lambda/(1 + lambda M) is exact.
// ---------------------------------------------------------------------------

ApproxSolution solve_d1(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                        const Vec& x, const AtsConfig& cfg) {
  require(m.order() == 1, "solve_d1: model order must be 1");
  require(lambda > 0.0, "solve_d1: lambda must be positive");
  const Vec& g = m.bundle().gradient;
  const double mreg = m.regularization();
  const double t = lambda / (1.0 + lambda * mreg);

  ApproxSolution sol;
  sol.y = h.prox(x - t * g, t);
  const Vec z = sol.y - x;
  if (z.norm() == 0.0 && g.norm() == 0.0) {
    sol.u = Vec::Zero(m.dim());
    sol.inner_iterations = 0;
    return sol;
  }
  sol.u = -z / lambda;  // equals grad f_x(y) + prox subgradient exactly
  sol.inner_iterations = 1;
  sol.residual_ratio = certificate_ratio(sol.y, sol.u, 0.0, lambda, x);
  if (!accepts(sol.residual_ratio, cfg))
    throw AtsFailure("solve_d1: certificate not met (residual " +
                     std::to_string(sol.residual_ratio) + ")");
  return sol;
}

// ---------------------------------------------------------------------------
// d = 2, h = 0: radial (secular) equation. The stationarity condition is
//   (H + ((M/2) r + 1/lambda) I) z = -g  with  r = ||z||,
// and phi(r) = ||z(r)|| - r is strictly decreasing with a unique root.
// ---------------------------------------------------------------------------

namespace {

double radial_norm(const Vec& gt, const Vec& alpha, double c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < gt.size(); ++i) {
    const double d = alpha[i] + c;
    s += gt[i] * gt[i] / (d * d);
  }
  return std::sqrt(s);
}

}  // namespace

ApproxSolution solve_d2(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                        const Vec& x, const AtsConfig& cfg) {
  require(m.order() == 2, "solve_d2: model order must be 2");
  require(lambda > 0.0, "solve_d2: lambda must be positive");
  if (!h.is_zero()) return solve_generic(m, h, lambda, x, cfg);

  const Vec& g = m.bundle().gradient;
  if (g.norm() == 0.0) return stationary_anchor(x, m.dim());

  Eigen::SelfAdjointEigenSolver<Mat> es(m.bundle().hessian->dense());
  Vec alpha = es.eigenvalues();
  const double amax = std::max(1.0, alpha.cwiseAbs().maxCoeff());
  require(alpha.minCoeff() >= -1e-9 * amax, "solve_d2: Hessian not PSD");
  alpha = alpha.cwiseMax(0.0);
  const Vec gt = es.eigenvectors().transpose() * g;
  const double mreg = m.regularization();

  double r_hat;
  int iters = 0;
  if (mreg == 0.0) {
    r_hat = radial_norm(gt, alpha, 1.0 / lambda);
  } else {
    double lo = 0.0, hi = radial_norm(gt, alpha, 1.0 / lambda);
    // phi(hi) <= 0 since ||z(r)|| is decreasing; bisect to the double floor
    for (; iters < 200 && hi - lo > kEps * hi; ++iters) {
      const double mid = 0.5 * (lo + hi);
      const double c = 0.5 * mreg * mid + 1.0 / lambda;
      if (radial_norm(gt, alpha, c) >= mid)
        lo = mid;
      else
        hi = mid;
    }
    r_hat = 0.5 * (lo + hi);
  }

  const double c = 0.5 * mreg * r_hat + 1.0 / lambda;
  Vec zt(gt.size());
  for (Eigen::Index i = 0; i < gt.size(); ++i) zt[i] = -gt[i] / (alpha[i] + c);
  const Vec z = es.eigenvectors() * zt;

  ApproxSolution sol;
  sol.y = x + z;
  // grad f_x(y) by the stationarity identity of the shifted system
  sol.u = (0.5 * mreg * (z.norm() - r_hat) - 1.0 / lambda) * z;
  sol.inner_iterations = std::max(iters, 1);
  sol.residual_ratio = certificate_ratio(sol.y, sol.u, 0.0, lambda, x);
  if (!accepts(sol.residual_ratio, cfg))
    throw AtsFailure("solve_d2: radial root not accurate enough (residual " +
                     std::to_string(sol.residual_ratio) + "); M < L_2 or extreme lambda");
  return sol;
}

// ---------------------------------------------------------------------------
// tau subproblem: min_z a^T z + z^T A z / 2 + gamma ||z||^4 / 4 via the
// univariate dual. With z(tau) = -(2 gamma tau I + A)^{-1} a the optimality
// condition is ||z(tau)||^2 = 2 tau, a strictly increasing root problem.
// ---------------------------------------------------------------------------

TauResult solve_tau_spectral(const Vec& eigvals, const Mat& eigvecs, const Vec& a,
                             double gamma, double tol) {
  require(gamma > 0.0, "solve_tau: gamma must be positive");
  const double amax = std::max(1.0, eigvals.cwiseAbs().maxCoeff());
  require(eigvals.minCoeff() >= -1e-9 * amax, "solve_tau: A not PSD");

  TauResult out;
  const double na = a.norm();
  if (na == 0.0) {
    out.z = Vec::Zero(a.size());
    return out;
  }
  const Vec alpha = eigvals.cwiseMax(0.0);
  const Vec at = eigvecs.transpose() * a;

  auto s_of = [&](double tau) {  // ||z(tau)||^2
    double s = 0.0;
    for (Eigen::Index i = 0; i < at.size(); ++i) {
      const double d = 2.0 * gamma * tau + alpha[i];
      s += at[i] * at[i] / (d * d);
    }
    return s;
  };
  auto s_deriv = [&](double tau) {  // d/dtau ||z(tau)||^2
    double s = 0.0;
    for (Eigen::Index i = 0; i < at.size(); ++i) {
      const double d = 2.0 * gamma * tau + alpha[i];
      s += at[i] * at[i] / (d * d * d);
    }
    return -4.0 * gamma * s;
  };

  // psi(tau) = 2 tau - ||z(tau)||^2 is increasing; bracket then safeguarded Newton
  double hi = 1.0000001 * std::cbrt(na * na / (8.0 * gamma * gamma)) + 1e-300;
  while (2.0 * hi - s_of(hi) <= 0.0) hi *= 2.0;
  double lo = 0.0;
  double tau = hi;
  for (int it = 0; it < 200; ++it) {
    ++out.iterations;
    const double s = s_of(tau);
    const double psi = 2.0 * tau - s;
    if (std::abs(psi) <= tol * (1.0 + 2.0 * tau)) break;
    if (psi > 0.0)
      hi = tau;
    else
      lo = tau;
    const double dpsi = 2.0 - s_deriv(tau);
    double next = tau - psi / dpsi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    tau = next;
  }
  out.tau = tau;
  Vec zt(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) zt[i] = -at[i] / (2.0 * gamma * tau + alpha[i]);
  out.z = eigvecs * zt;
  return out;
}

TauResult solve_tau(const SymMatrix& a_mat, const Vec& a, double gamma, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a_mat.dense());
  return solve_tau_spectral(es.eigenvalues(), es.eigenvectors(), a, gamma, tol);
}

// ---------------------------------------------------------------------------
// d = 3, h = 0: Bregman gradient method on
//   Omega(z) = g^T z + z^T (H + I/lambda) z / 2 + T[z]^3/6 + M ||z||^4 / 24
// relative to rho(z) = z^T Q z + gamma0 ||z||^4 with
//   Q = (kappa-1)/(2 kappa) H + (kappa-1)/(2 lambda (kappa+1)) I,
//   gamma0 = kappa (kappa-1) L3 / 8,  L3 = M / (3 kappa^2).
// Each step minimizes a quartic-regularized quadratic via solve_tau with the
// anchor Hessian eigendecomposition computed once. A damped Newton phase
// finishes off when the Bregman iteration stalls short of the certificate.
// ---------------------------------------------------------------------------

ApproxSolution solve_d3(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                        const Vec& x, const AtsConfig& cfg) {
  require(m.order() == 3, "solve_d3: model order must be 3");
  require(lambda > 0.0, "solve_d3: lambda must be positive");
  require(cfg.kappa > 1.0, "solve_d3: kappa must exceed 1");
  if (!h.is_zero()) return solve_generic(m, h, lambda, x, cfg);

  const int n = m.dim();
  const Vec& g = m.bundle().gradient;
  if (g.norm() == 0.0) return stationary_anchor(x, n);

  const SymMatrix& hess = *m.bundle().hessian;
  const SymTensor3& t3 = *m.bundle().third;
  const double mreg = m.regularization();
  const double kappa = cfg.kappa;
  const double l3 = mreg / (3.0 * kappa * kappa);

  Eigen::SelfAdjointEigenSolver<Mat> es(hess.dense());
  const Vec hvals = es.eigenvalues().cwiseMax(0.0);
  const Mat& v = es.eigenvectors();

  const double q_h = (kappa - 1.0) / (2.0 * kappa);
  const double q_i = (kappa - 1.0) / (2.0 * lambda * (kappa + 1.0));
  const double gamma0 = kappa * (kappa - 1.0) * l3 / 8.0;

  auto omega = [&](const Vec& z) {
    return g.dot(z) + 0.5 * hess.quadratic_form(z) + 0.5 * z.squaredNorm() / lambda +
           contract3_full(t3, z, z, z) / 6.0 + mreg / 24.0 * std::pow(z.squaredNorm(), 2);
  };
  auto omega_grad = [&](const Vec& z) -> Vec {
    return g + hess.apply(z) + z / lambda + 0.5 * contract3_to_matrix(t3, z).apply(z) +
           (mreg / 6.0) * z.squaredNorm() * z;
  };

  double l_rel = (kappa + 1.0) / (kappa - 1.0);
  Vec z = Vec::Zero(n);
  double omega_cur = 0.0;
  int stall = 0;

  ApproxSolution sol;
  int it = 0;
  for (; it < cfg.max_inner; ++it) {
    const Vec grad = omega_grad(z);
    sol.y = x + z;
    sol.u = grad - z / lambda;  // grad f_x(y)
    sol.residual_ratio = certificate_ratio(sol.y, sol.u, 0.0, lambda, x);
    if (z.norm() > 0.0 && accepts(sol.residual_ratio, cfg)) {
      sol.inner_iterations = it;
      return sol;
    }
    if (stall >= 3) break;  // switch to Newton polishing

    const Vec rho_grad = 2.0 * (q_h * hess.apply(z) + q_i * z) + 4.0 * gamma0 * z.squaredNorm() * z;
    const Vec a_vec = grad - l_rel * rho_grad;
    const Vec sub_eigs = (2.0 * l_rel * q_h) * hvals + Vec::Constant(n, 2.0 * l_rel * q_i);
    const double gamma_sub = 4.0 * l_rel * gamma0;
    const TauResult step = solve_tau_spectral(sub_eigs, v, a_vec, gamma_sub, cfg.tau_tol);

    const double omega_new = omega(step.z);
    if (omega_new > omega_cur + 1e-12 * (1.0 + std::abs(omega_cur))) {
      // relative-smoothness majorization violated numerically; be more cautious
      l_rel = std::min(l_rel * 2.0, 1e8);
      ++stall;
      continue;
    }
    if (omega_cur - omega_new <= 4.0 * kEps * (1.0 + std::abs(omega_cur)))
      ++stall;
    else
      stall = 0;
    z = step.z;
    omega_cur = omega_new;
    if (cfg.d3_objective_log) cfg.d3_objective_log->push_back(omega_cur);
  }

  // Damped Newton on the strongly convex Omega
  for (; it < cfg.max_inner; ++it) {
    const Vec grad = omega_grad(z);
    sol.y = x + z;
    sol.u = grad - z / lambda;
    sol.residual_ratio = certificate_ratio(sol.y, sol.u, 0.0, lambda, x);
    if (z.norm() > 0.0 && accepts(sol.residual_ratio, cfg)) {
      sol.inner_iterations = it;
      return sol;
    }
    Mat hess_omega = hess.dense() + contract3_to_matrix(t3, z).dense();
    const double zz = z.squaredNorm();
    hess_omega.diagonal().array() += 1.0 / lambda + mreg / 6.0 * zz;
    hess_omega += (mreg / 3.0) * (z * z.transpose());
    Vec dir = hess_omega.ldlt().solve(-grad);
    if (!dir.allFinite()) dir = -grad;
    double t = 1.0;
    const double slope = grad.dot(dir);
    const double base = omega(z);
    // rounding slack keeps the search from collapsing once Omega differences
    // are below the double resolution
    const double f_slack = 4.0 * kEps * (1.0 + std::abs(base));
    for (int ls = 0; ls < 60 && omega(z + t * dir) > base + 1e-4 * t * slope + f_slack; ++ls)
      t *= 0.5;
    z += t * dir;
  }
  throw AtsFailure("solve_d3: max_inner exhausted without certificate");
}

// ---------------------------------------------------------------------------
// Generic composite solver: prox-gradient with backtracking on the
// (1/lambda)-strongly-convex smooth part s(y) = f_x(y) + ||y-x||^2/(2 lambda).
// ---------------------------------------------------------------------------

ApproxSolution solve_generic(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                             const Vec& x, const AtsConfig& cfg) {
  require(lambda > 0.0, "solve_generic: lambda must be positive");
  const int n = m.dim();

  {  // exact stationary anchor: 0 iterations
    const Vec u0 = h.min_norm_subgradient(x, m.bundle().gradient);
    if (u0.norm() == 0.0) return stationary_anchor(x, n);
  }

  auto smooth_val = [&](const Vec& y) {
    return m.value(y) + 0.5 * (y - x).squaredNorm() / lambda;
  };
  auto smooth_grad = [&](const Vec& y) -> Vec { return m.gradient(y) + (y - x) / lambda; };

  double curv = 1.0 / lambda + m.regularization();
  if (m.order() >= 2) curv += m.bundle().hessian->frobenius_norm();
  // backtracking only shrinks t; growing it near the floating-point floor
  // lets the step escape the stable region and the residual stalls
  double t = 1.0 / curv;

  Vec w = x;
  ApproxSolution sol;
  for (int it = 1; it <= cfg.max_inner; ++it) {
    const Vec gs = smooth_grad(w);
    const double sw = smooth_val(w);
    Vec y_next;
    int bt = 0;
    for (;; ++bt) {
      y_next = h.prox(w - t * gs, t);
      const Vec d = y_next - w;
      const double quad_gap = sw + gs.dot(d) + 0.5 * d.squaredNorm() / t;
      if (smooth_val(y_next) <= quad_gap + 4.0 * kEps * (1.0 + std::abs(sw)) || bt >= 60) break;
      t *= 0.5;
    }
    const Vec g_h = (w - y_next) / t - gs;  // in dh(y_next) by prox optimality
    sol.y = y_next;
    sol.u = m.gradient(y_next) + g_h;
    sol.eps = 0.0;
    sol.residual_ratio = certificate_ratio(sol.y, sol.u, 0.0, lambda, x);
    sol.inner_iterations = it;
    if ((sol.y - x).norm() > 0.0 && accepts(sol.residual_ratio, cfg)) return sol;
    w = y_next;
  }
  throw AtsFailure("solve_generic: max_inner exhausted without certificate");
}

ApproxSolution ats_solve(const TaylorModel& m, const NonsmoothTerm& h, double lambda,
                         const Vec& x, const AtsConfig& cfg) {
  switch (m.order()) {
    case 1:
      return solve_d1(m, h, lambda, x, cfg);
    case 2:
      return h.is_zero() ? solve_d2(m, h, lambda, x, cfg) : solve_generic(m, h, lambda, x, cfg);
    case 3:
      return h.is_zero() ? solve_d3(m, h, lambda, x, cfg) : solve_generic(m, h, lambda, x, cfg);
    default:
      throw std::invalid_argument("ats_solve: unsupported order");
  }
}

double psi_residual(const TaylorModel& m, const NonsmoothTerm& h, double lambda, const Vec& x) {
  AtsConfig tight;
  tight.sigma_hat = 1e-10;
  tight.max_inner = 500000;
  tight.tau_tol = 1e-14;
  const ApproxSolution sol = ats_solve(m, h, lambda, x, tight);
  const double r = (sol.y - x).norm();
  if (r == 0.0) return 0.0;  // stationary anchor: zero displacement, zero residual
  const int d = m.order();
  return d == 1 ? lambda : lambda * std::pow(r, d - 1);
}

}  // namespace hotm
