#include "hotm/baselines.hpp"

#include "hotm/ahpe.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hotm;

namespace {

// anisotropic quadratic with eigenvalues {1, 0.1}: closed-form GD contraction
Problem aniso_quadratic() {
  auto oracle = [](const Vec& x, int order) {
    DerivativeBundle b;
    Vec diag(2);
    diag << 1.0, 0.1;
    b.value = 0.5 * x.dot(diag.asDiagonal() * x);
    b.gradient = diag.asDiagonal() * x;
    if (order >= 2) {
      SymMatrix h(2);
      h.ref(0, 0) = 1.0;
      h.ref(1, 1) = 0.1;
      b.hessian = std::move(h);
    }
    if (order >= 3) b.third = SymTensor3(2);
    return b;
  };
  auto opt = []() -> std::optional<KnownOptimum> { return KnownOptimum{Vec::Zero(2), 0.0}; };
  return Problem("aniso", 2, oracle, {1.0, 1e-12, 1e-12}, NonsmoothTerm::zero(),
                 Vec::Constant(2, 1.0), opt);
}

}  // namespace

TEST_CASE("gradient descent on a quadratic contracts at the closed-form rate") {
  Problem p = aniso_quadratic();
  BaselineConfig cfg;
  cfg.max_iter = 200;
  cfg.tol = 1e-12;
  const RunTrace t = run_gd(p, p.default_start(), cfg);
  REQUIRE(t.records.size() > 10);
  // with step 1/L the slow eigendirection contracts by (1 - 0.1)^2 per step in F
  for (std::size_t i = 5; i < 15; ++i) {
    const double ratio = t.records[i].f_y / t.records[i - 1].f_y;
    CHECK(ratio <= 0.81 + 1e-6);
    CHECK(ratio >= 0.81 - 1e-2);
  }
}

TEST_CASE("starting at the optimum converges immediately") {
  Problem p = aniso_quadratic();
  BaselineConfig cfg;
  for (auto method : {BaselineMethod::GD, BaselineMethod::AGD}) {
    cfg.method = method;
    const RunTrace t = run_baseline(p, Vec::Zero(2), cfg);
    CHECK(t.termination == Termination::Converged);
    CHECK(t.records.size() <= 2);
  }
}

TEST_CASE("AGD reaches the tolerance in fewer iterations than GD") {
  Problem p = make_logistic(10, 50, 101);
  BaselineConfig cfg;
  cfg.tol = 1e-6;
  cfg.max_iter = 100000;
  const RunTrace gd = run_gd(p, p.default_start(), cfg);
  const RunTrace agd = run_agd(p, p.default_start(), cfg);
  CHECK(gd.termination == Termination::Converged);
  CHECK(agd.termination == Termination::Converged);
  CHECK(agd.records.size() < gd.records.size());
}

TEST_CASE("basic tensor method") {
  Problem p = make_quartic(5);
  SUBCASE("stationary start is a fixed point") {
    BaselineConfig cfg;
    cfg.method = BaselineMethod::BasicTensor;
    cfg.d = 2;
    const RunTrace t = run_basic_tensor(p, Vec::Zero(5), cfg);
    CHECK(t.termination == Termination::Converged);
    CHECK(t.y_final.norm() == 0.0);
  }
  SUBCASE("monotone descent when M >= L_d") {
    for (int d : {1, 2, 3}) {
      CAPTURE(d);
      BaselineConfig cfg;
      cfg.method = BaselineMethod::BasicTensor;
      cfg.d = d;
      cfg.tol = 1e-8;
      cfg.max_iter = d == 1 ? 20000 : 300;
      const RunTrace t = run_basic_tensor(p, p.default_start(), cfg);
      double prev = p.objective(p.default_start());
      for (const auto& r : t.records) {
        CHECK(r.f_y <= prev + 1e-12 * (1.0 + std::abs(prev)));
        prev = r.f_y;
      }
      CHECK(t.termination == Termination::Converged);
    }
  }
  SUBCASE("M below L_d is rejected") {
    BaselineConfig cfg;
    cfg.method = BaselineMethod::BasicTensor;
    cfg.d = 2;
    cfg.m_reg = 0.5 * p.lipschitz(2);
    CHECK_THROWS_AS(run_basic_tensor(p, p.default_start(), cfg), std::invalid_argument);
  }
  SUBCASE("slower than the accelerated method on the same budget") {
    BaselineConfig bc;
    bc.method = BaselineMethod::BasicTensor;
    bc.d = 2;
    bc.tol = 1e-13;
    bc.max_iter = 30;
    const RunTrace basic = run_basic_tensor(p, p.default_start(), bc);

    SolverConfig sc;
    sc.d = 2;
    sc = resolve_config(p, sc);
    sc.rho_bar = 1e-10;
    sc.max_outer = 30;
    const RunTrace fast = run(p, p.default_start(), sc);

    const std::size_t k = std::min(basic.records.size(), fast.records.size()) - 1;
    REQUIRE(k >= 5);
    CHECK(fast.records[k].f_y < basic.records[k].f_y);  // F* = 0
  }
}

TEST_CASE("baselines share the trace schema") {
  Problem p = aniso_quadratic();
  BaselineConfig cfg;
  cfg.max_iter = 5;
  cfg.tol = 1e-15;
  for (auto method : {BaselineMethod::GD, BaselineMethod::AGD, BaselineMethod::BasicTensor}) {
    cfg.method = method;
    cfg.d = 2;
    const RunTrace t = run_baseline(p, p.default_start(), cfg);
    for (const auto& r : t.records) {
      CHECK(r.k >= 1);
      CHECK(std::isfinite(r.f_y));
      CHECK(std::isfinite(r.norm_v));
    }
  }
}
