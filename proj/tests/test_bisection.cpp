#include "hotm/bisection.hpp"

#include "hotm/taylor_model.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hotm;
using testutil::rvec;

namespace {

SolverConfig quartic_config(int d) {
  Problem p = make_quartic(4);
  SolverConfig c;
  c.d = d;
  return resolve_config(p, c);
}

double recompute_product(const Problem& p, const SolverConfig& cfg, const Vec& x_k,
                         const Vec& y_k, double a_total, double beta) {
  const double lambda = lambda_of_beta(a_total, beta);
  const Vec x_beta = x_of_beta(beta, x_k, y_k);
  const TaylorModel model(x_beta, p.query(x_beta, cfg.d), cfg.m_reg, cfg.d);
  const ApproxSolution sol = ats_solve(model, p.h(), lambda, x_beta, cfg.ats);
  return large_step_product(lambda, (sol.y - x_beta).norm(), cfg.d);
}

}  // namespace

TEST_CASE("lambda_of_beta") {
  CHECK(lambda_of_beta(1.0, 0.5) == doctest::Approx(0.5));
  CHECK(lambda_of_beta(3.0, 0.0) == 0.0);
  CHECK(std::isinf(lambda_of_beta(2.0, 1.0)));
  CHECK_THROWS_AS(lambda_of_beta(1.0, 1.5), std::invalid_argument);

  SUBCASE("strictly increasing in beta") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (int t = 0; t < 100; ++t) {
      double b1 = unif(rng), b2 = unif(rng);
      if (b1 > b2) std::swap(b1, b2);
      if (b1 == b2) continue;
      const double a = std::exp(rvec(1, rng)[0]);
      CHECK(lambda_of_beta(a, b1) < lambda_of_beta(a, b2));
    }
  }
  SUBCASE("round-trips with beta_of_lambda") {
    std::mt19937_64 rng(62);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (int t = 0; t < 200; ++t) {
      const double a = std::exp(2.0 * rvec(1, rng)[0]);
      const double beta = unif(rng);
      CHECK(beta_of_lambda(a, lambda_of_beta(a, beta)) == doctest::Approx(beta).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta_of_lambda") {
  CHECK(beta_of_lambda(1.0, 0.0) == 0.0);
  CHECK(beta_of_lambda(1.0, 0.5) == doctest::Approx(0.5));

  SUBCASE("stable form agrees with the naive formula") {
    std::mt19937_64 rng(63);
    for (int t = 0; t < 200; ++t) {
      const double a = std::exp(3.0 * rvec(1, rng)[0]);
      const double lambda = std::exp(3.0 * rvec(1, rng)[0]);
      const double naive = (std::sqrt(lambda * lambda + 4.0 * lambda * a) - lambda) / (2.0 * a);
      CHECK(beta_of_lambda(a, lambda) == doctest::Approx(naive).epsilon(1e-12));
    }
  }
  SUBCASE("monotone increasing in lambda") {
    double prev = 0.0;
    for (double lambda : {0.01, 0.1, 1.0, 10.0, 1e3, 1e6}) {
      const double b = beta_of_lambda(2.0, lambda);
      CHECK(b > prev);
      CHECK(b < 1.0);
      prev = b;
    }
  }
}

TEST_CASE("x_of_beta") {
  Vec x(1), y(1);
  x << 2.0;
  y << 0.0;
  CHECK(x_of_beta(0.0, x, y)[0] == 0.0);
  CHECK(x_of_beta(1.0, x, y)[0] == 2.0);
  CHECK(x_of_beta(0.5, x, y)[0] == doctest::Approx(1.0));
}

TEST_CASE("large_step_product handles the d=1 exponent at step 0") {
  CHECK(large_step_product(3.0, 0.0, 1) == 3.0);
  CHECK(large_step_product(3.0, 2.0, 2) == 6.0);
  CHECK(large_step_product(3.0, 2.0, 3) == 12.0);
}

TEST_CASE("search at a stationary anchor returns NearOptimal immediately") {
  Problem p = make_quartic(4);
  SolverConfig cfg = quartic_config(2);
  const Vec opt = Vec::Zero(4);
  SearchStats stats;
  const BisectionOutcome out = search(p, opt, opt, 0.0, cfg, &stats);
  REQUIRE(std::holds_alternative<NearOptimal>(out));
  const auto& acc = std::get<NearOptimal>(out);
  CHECK(acc.v.norm() <= cfg.rho_bar);
  CHECK(acc.sol.eps <= cfg.eps_bar);
  CHECK(stats.steps == 1);
}

TEST_CASE("first-iteration search satisfies the exact two-sided condition") {
  Problem p = make_quartic(5);
  for (int d = 1; d <= 3; ++d) {
    CAPTURE(d);
    SolverConfig cfg;
    cfg.d = d;
    cfg = resolve_config(p, cfg);
    SearchStats stats;
    const BisectionOutcome out =
        search(p, p.default_start(), p.default_start(), 0.0, cfg, &stats);
    REQUIRE(std::holds_alternative<LargeStep>(out));
    const auto& acc = std::get<LargeStep>(out);
    const double fact = d == 1 ? 1.0 : (d == 2 ? 2.0 : 6.0);
    const double denom = p.lipschitz(d) + cfg.m_reg;
    const double prod = large_step_product(acc.lambda, (acc.sol.y - acc.x_tilde).norm(), d);
    CHECK(prod >= fact * cfg.sigma_l / denom);
    CHECK(prod <= fact * cfg.sigma_u / denom);
    CHECK(certify(acc.sol.y, acc.sol.u, acc.sol.eps, acc.lambda, acc.x_tilde, cfg.sigma_hat()));
    CHECK(stats.oracle_full == 1);  // the first-iteration anchor is fixed
  }
}

TEST_CASE("beta-bisection with positive A_k accepts a certified large step") {
  Problem p = make_logistic(6, 30, 71);
  SolverConfig cfg;
  cfg.d = 2;
  cfg = resolve_config(p, cfg);
  std::mt19937_64 rng(71);
  const Vec x_k = rvec(6, rng);
  const Vec y_k = rvec(6, rng);
  SearchStats stats;
  const BisectionOutcome out = search(p, x_k, y_k, 2.5, cfg, &stats);
  REQUIRE(std::holds_alternative<LargeStep>(out));
  const auto& acc = std::get<LargeStep>(out);
  // the anchor is the beta combination and lambda matches the beta map
  CHECK((acc.x_tilde - x_of_beta(acc.beta, x_k, y_k)).norm() <= 1e-14);
  CHECK(acc.lambda == doctest::Approx(lambda_of_beta(2.5, acc.beta)).epsilon(1e-14));
  CHECK(acc.sol.residual_ratio <= cfg.sigma_hat());
  CHECK(stats.oracle_full == stats.steps);  // one order-d query per step
  CHECK(stats.oracle_grad == stats.steps);  // one gradient query per candidate
}

TEST_CASE("failed search brackets the target window") {
  Problem p = make_logistic(6, 30, 72);
  SolverConfig cfg;
  cfg.d = 2;
  cfg = resolve_config(p, cfg);
  std::mt19937_64 rng(72);
  const Vec x_k = rvec(6, rng);
  const Vec y_k = rvec(6, rng);

  // starve the bisection so it fails with an interior interval
  SolverConfig starved = cfg;
  starved.max_bisect = 4;
  const BisectionOutcome out = search(p, x_k, y_k, 1.7, starved);
  if (std::holds_alternative<BisectFailed>(out)) {
    const auto& f = std::get<BisectFailed>(out);
    CHECK(f.state.beta_hi - f.state.beta_lo ==
          doctest::Approx(std::pow(2.0, -f.state.steps)).epsilon(1e-12));
    if (f.state.beta_lo > 0.0) {
      const double prod = recompute_product(p, cfg, x_k, y_k, 1.7, f.state.beta_lo);
      CHECK(prod < f.state.alpha_lo);
    }
    if (f.state.beta_hi < 1.0) {
      const double prod = recompute_product(p, cfg, x_k, y_k, 1.7, f.state.beta_hi);
      CHECK(prod > f.state.alpha_hi);
    }
  } else {
    CHECK(std::holds_alternative<LargeStep>(out));  // found within 4 steps; nothing to bracket
  }
}

TEST_CASE("step_count_report") {
  RunTrace t;
  t.problem = "toy";
  t.method = "optimal-d2";
  t.config.rho_bar = 1e-6;
  t.config.eps_bar = 1e-9;
  IterRecord r1, r2;
  r1.bisect_steps = 4;
  r2.bisect_steps = 10;
  t.records = {r1, r2};
  const auto rows = step_count_report({t});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].max_steps == 10);
  CHECK(rows[0].mean_steps == doctest::Approx(7.0));
  CHECK(rows[0].log2_inv_rho == doctest::Approx(std::log2(1e6)));
  CHECK(rows[0].log2_inv_eps == doctest::Approx(std::log2(1e9)));
}

TEST_CASE("lambda_bar_threshold is a positive diagnostic") {
  Problem p = make_logistic(5, 20, 73);
  for (int d = 1; d <= 3; ++d) {
    SolverConfig cfg;
    cfg.d = d;
    cfg = resolve_config(p, cfg);
    CHECK(lambda_bar_threshold(cfg, p) > 0.0);
  }
}
