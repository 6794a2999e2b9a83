#include "hotm/ahpe.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hotm;
using testutil::rvec;

namespace {

SolverConfig config_for(const Problem& p, int d) {
  SolverConfig c;
  c.d = d;
  return resolve_config(p, c);
}

}  // namespace

TEST_CASE("validate_config") {
  Problem p = make_quartic(4);
  SUBCASE("defaults are valid for every order") {
    for (int d = 1; d <= 3; ++d) CHECK(validate_config(config_for(p, d), p).empty());
  }
  SUBCASE("sigma = sigma_hat + sigma_u must stay below 1") {
    SolverConfig c = config_for(p, 2);
    c.ats.sigma_hat = 0.5;
    c.sigma_u = 0.6;
    const auto bad = validate_config(c, p);
    CHECK(!bad.empty());
    bool found = false;
    for (const auto& s : bad) found = found || s.find("sigma_hat + sigma_u") != std::string::npos;
    CHECK(found);
  }
  SUBCASE("M below L_d is rejected") {
    SolverConfig c = config_for(p, 2);
    c.m_reg = 0.5 * p.lipschitz(2);
    CHECK(!validate_config(c, p).empty());
  }
  SUBCASE("every violation is reported individually") {
    SolverConfig c;
    c.d = 7;
    c.sigma_l = 0.9;
    c.sigma_u = 0.2;
    c.rho_bar = 2.0;
    c.m_reg = -1.0;
    CHECK(validate_config(c, p).size() >= 4);
    CHECK_THROWS_AS(validate_config_or_throw(c, p), std::invalid_argument);
  }
}

TEST_CASE("a_next") {
  CHECK(a_next(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(a_next(2.0, 1.0) == doctest::Approx(2.0));  // 4 - 2 - 2 = 0
  SUBCASE("lambda = a^2/(A_k + a) identity") {
    std::mt19937_64 rng(81);
    for (int t = 0; t < 200; ++t) {
      const double a_total = std::exp(3.0 * rvec(1, rng)[0]);
      const double lambda = std::exp(3.0 * rvec(1, rng)[0]);
      const double a = a_next(a_total, lambda);
      CHECK(a * a / (a_total + a) == doctest::Approx(lambda).epsilon(1e-12));
    }
  }
}

TEST_CASE("solver_step") {
  Problem p = make_quartic(5);
  SUBCASE("exact optimum converges without stepping") {
    SolverConfig cfg = config_for(p, 2);
    SolverState s = make_initial_state(p, Vec::Zero(5));
    CHECK_FALSE(solver_step(s, p, cfg).has_value());
    CHECK(s.terminated);
    CHECK(s.term == Termination::Converged);
  }
  SUBCASE("near-optimal start terminates in a few iterations with small v") {
    SolverConfig cfg = config_for(p, 2);
    SolverState s = make_initial_state(p, Vec::Constant(5, 1e-4));
    int steps = 0;
    while (!s.terminated && steps < 10) {
      solver_step(s, p, cfg);
      ++steps;
    }
    CHECK(s.term == Termination::Converged);
    CHECK(s.v.norm() <= cfg.rho_bar);
  }
  SUBCASE("sigma-relation after every large step and x~ consistency") {
    SolverConfig cfg = config_for(p, 2);
    RunTrace t = run(p, p.default_start(), cfg);
    REQUIRE(t.records.size() >= 2);
    const double sigma = cfg.sigma();
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const IterRecord& r = t.records[i];
      if (r.large_step)
        CHECK(r.prop32_lhs <= sigma * sigma * r.step_norm * r.step_norm * (1.0 + 1e-12));
      if (i >= 1) {
        // Eq-14 combination recomputed from the stored vectors
        const IterRecord& prev = t.records[i - 1];
        const Vec want = (prev.a_total * prev.y + r.a_incr * prev.x_after) / r.a_total;
        CHECK((want - r.x_tilde).norm() <= 1e-10 * (1.0 + r.x_tilde.norm()));
      }
      // x_{k+1} = x_k - a_{k+1} v_{k+1}
      const Vec x_prev = i == 0 ? t.x0 : t.records[i - 1].x_after;
      CHECK((r.x_after - (x_prev - r.a_incr * r.v)).norm() <= 1e-12 * (1.0 + x_prev.norm()));
    }
  }
}

TEST_CASE("run on the quartic problem") {
  Problem p = make_quartic(5);
  SUBCASE("d=2 converges below the known optimum gap") {
    SolverConfig cfg = config_for(p, 2);
    cfg.rho_bar = 1e-6;
    const RunTrace t = run(p, p.default_start(), cfg);
    CHECK(t.termination == Termination::Converged);
    REQUIRE(!t.records.empty());
    CHECK(t.records.back().f_y <= 1e-8);  // F* = 0
    // A_k strictly increasing
    double prev = 0.0;
    for (const auto& r : t.records) {
      CHECK(r.a_total > prev);
      prev = r.a_total;
    }
  }
  SUBCASE("max_outer = 0 gives an empty trace") {
    SolverConfig cfg = config_for(p, 2);
    cfg.max_outer = 0;
    const RunTrace t = run(p, p.default_start(), cfg);
    CHECK(t.records.empty());
    CHECK(t.termination == Termination::MaxIter);
  }
  SUBCASE("certificates hold for every accepted iteration across orders") {
    for (int d = 1; d <= 3; ++d) {
      CAPTURE(d);
      SolverConfig cfg = config_for(p, d);
      const RunTrace t = run(p, p.default_start(), cfg);
      CHECK(t.termination == Termination::Converged);
      for (const auto& r : t.records) {
        CHECK(r.residual_ratio <= cfg.sigma_hat());
        CHECK(r.eps == 0.0);
      }
    }
  }
}

TEST_CASE("run on the composite lasso matches the reference solve") {
  Problem p = make_lasso(12, 24, 91);
  SolverConfig cfg = config_for(p, 2);
  cfg.rho_bar = 1e-7;
  cfg.max_outer = 400;
  const RunTrace t = run(p, p.default_start(), cfg);
  CHECK(t.termination == Termination::Converged);
  REQUIRE(p.known_optimum().has_value());
  const Vec& x_ref = p.known_optimum()->x_star;
  CHECK(t.records.back().f_y - p.known_optimum()->f_star <= 1e-6);
  // support agreement against the reference prox-gradient solution
  for (int i = 0; i < p.dim(); ++i) {
    const bool ref_active = std::abs(x_ref[i]) > 1e-7;
    const bool sol_active = std::abs(t.y_final[i]) > 1e-7;
    CHECK(ref_active == sol_active);
  }
}

TEST_CASE("epsilon-subgradient inequality at the optimum") {
  Problem p = make_quartic(4);
  SolverConfig cfg = config_for(p, 2);
  const RunTrace t = run(p, p.default_start(), cfg);
  REQUIRE(p.known_optimum().has_value());
  const Vec& xs = p.known_optimum()->x_star;
  const double fs = p.known_optimum()->f_star;
  for (const auto& r : t.records) {
    // F* >= F(y_k) + <v_k, x* - y_k> - eps_k
    CHECK(fs >= r.f_y + r.v.dot(xs - r.y) - r.eps - 1e-10 * (1.0 + std::abs(r.f_y)));
  }
}

TEST_CASE("check_potential") {
  Problem p = make_quartic(5);
  SolverConfig cfg = config_for(p, 2);
  const RunTrace t = run(p, p.default_start(), cfg);
  SUBCASE("all inequalities pass on a quartic run") {
    const PotentialReport rep = check_potential(t, p);
    CHECK(rep.all_ok);
    REQUIRE(!rep.rows.empty());
    // k=1 case of the quarter bound: A_1 = lambda_1 >= lambda_1/4
    CHECK(t.records[0].a_total == doctest::Approx(t.records[0].lambda).epsilon(1e-12));
    CHECK(rep.rows[0].rhs_quarter == doctest::Approx(0.25 * t.records[0].lambda).epsilon(1e-12));
  }
  SUBCASE("empty trace gives an empty report") {
    RunTrace empty = t;
    empty.records.clear();
    const PotentialReport rep = check_potential(empty, p);
    CHECK(rep.rows.empty());
    CHECK(rep.all_ok);
  }
}

TEST_CASE("check_rate_bound") {
  Problem pa = make_logistic(8, 40, 92);
  SUBCASE("theorem bound and recursion hold for d=2") {
    SolverConfig cfg = config_for(pa, 2);
    cfg.rho_bar = 1e-8;
    const RunTrace t = run(pa, pa.default_start(), cfg);
    const RateReport rep = check_rate_bound(t, pa);
    CHECK(rep.all_ok);
    CHECK(rep.recursion_applicable);
    CHECK(rep.checked_prefix >= 1);
    // the Holder constant recomputed from first principles
    const double sigma = cfg.sigma();
    const double dist = (t.x0 - pa.known_optimum()->x_star).norm();
    const double alpha_lo = 2.0 * cfg.sigma_l / (pa.lipschitz(2) + cfg.m_reg);
    const double c_manual =
        dist * dist / (1.0 - sigma * sigma) * std::pow(alpha_lo, -2.0 / (2 - 1));
    CHECK(rep.c_const == doctest::Approx(c_manual).epsilon(1e-12));
  }
  SUBCASE("d=1 skips the recursion") {
    SolverConfig cfg = config_for(pa, 1);
    const RunTrace t = run(pa, pa.default_start(), cfg);
    const RateReport rep = check_rate_bound(t, pa);
    CHECK_FALSE(rep.recursion_applicable);
    CHECK(rep.all_ok);
  }
}

TEST_CASE("theorem_rate_bound formula value") {
  // d=2, sigma_hat=0.1, sigma_l=0.2, sigma_u=0.8, L+M=2, D=1, k=4:
  // (3/2)^3.5 * 4 / ((1-0.81)^0.5 * 2 * 0.2) * 2 * 4^-3.5
  const double expect = std::pow(1.5, 3.5) * 4.0 / (std::sqrt(0.19) * 2.0 * 0.2) * 2.0 *
                        std::pow(4.0, -3.5);
  CHECK(theorem_rate_bound(2, 0.1, 0.2, 0.8, 1.0, 1.0, 1.0, 4) ==
        doctest::Approx(expect).epsilon(1e-14));
}
