#include "hotm/cli.hpp"

#include "hotm/ahpe.hpp"
#include "hotm/baselines.hpp"
#include "hotm/trace_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

namespace hotm::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitCertificate = 3;
constexpr int kExitSolver = 4;

struct CommonOpts {
  std::string problem;
  int n = 0;
  int m = 0;
  std::uint64_t seed = 42;
  int d = 2;
  std::string method = "optimal";
  double sigma_hat = 0.1;
  double sigma_l = 0.2;
  double sigma_u = 0.8;
  double m_reg = 0.0;
  double rho_bar = 1e-6;
  double eps_bar = 1e-9;
  int max_outer = -1;  // -1: per-method default (200 optimal, 200000 baselines)
  int max_bisect = 200;
  double kappa = 1.2;
  double inner_slack = 0.0;
  std::string out = "hotm_out";
  bool check_certs = false;
  std::vector<std::string> reports;
  std::string methods_csv;
  double gap_tol = 1e-8;
};

struct MethodSpec {
  std::string kind;  // optimal | gd | agd | basic
  int d = 2;
  std::string token;
};

MethodSpec parse_method(std::string token, int default_d) {
  MethodSpec ms;
  ms.d = default_d;
  // accept an explicit order suffix: optimal-d3, basic-d2, ...
  const auto pos = token.rfind("-d");
  if (pos != std::string::npos && pos + 2 < token.size()) {
    const char c = token[pos + 2];
    if (c >= '1' && c <= '3' && pos + 3 == token.size()) {
      ms.d = c - '0';
      token = token.substr(0, pos);
    }
  }
  if (token != "optimal" && token != "gd" && token != "agd" && token != "basic")
    throw std::invalid_argument("unknown method '" + token +
                                "'; available: optimal, gd, agd, basic (optional -d1/-d2/-d3)");
  ms.kind = token;
  ms.token = ms.kind == "gd" || ms.kind == "agd" ? ms.kind
                                                 : ms.kind + "-d" + std::to_string(ms.d);
  return ms;
}

SolverConfig to_solver_config(const CommonOpts& o, int d) {
  SolverConfig c;
  c.d = d;
  c.sigma_l = o.sigma_l;
  c.sigma_u = o.sigma_u;
  c.m_reg = o.m_reg;
  c.rho_bar = o.rho_bar;
  c.eps_bar = o.eps_bar;
  c.max_outer = o.max_outer >= 0 ? o.max_outer : 200;
  c.max_bisect = o.max_bisect;
  c.ats.sigma_hat = o.sigma_hat;
  c.ats.kappa = o.kappa;
  c.ats.accept_slack = o.inner_slack;
  return c;
}

RunTrace execute(const Problem& p, const MethodSpec& ms, const CommonOpts& o) {
  if (ms.kind == "optimal") return run(p, to_solver_config(o, ms.d));
  BaselineConfig bc;
  bc.max_iter = o.max_outer >= 0 ? o.max_outer : 200000;
  bc.tol = o.rho_bar;
  bc.d = ms.d;
  bc.m_reg = o.m_reg;
  bc.ats.sigma_hat = o.sigma_hat;
  bc.ats.kappa = o.kappa;
  bc.ats.accept_slack = o.inner_slack;
  if (ms.kind == "gd") bc.method = BaselineMethod::GD;
  if (ms.kind == "agd") bc.method = BaselineMethod::AGD;
  if (ms.kind == "basic") bc.method = BaselineMethod::BasicTensor;
  return run_baseline(p, p.default_start(), bc);
}

struct CertificateCheck {
  int checked = 0;
  int violations = 0;
  std::string first_violation;
};

CertificateCheck check_certificates(const RunTrace& t, const Problem& p) {
  CertificateCheck cc;
  const double sigma_hat = t.config.sigma_hat();
  const double sigma = t.config.sigma();
  const int d = t.config.d;
  const double denom = p.lipschitz(d) + t.config.m_reg;
  const double fact = d == 1 ? 1.0 : (d == 2 ? 2.0 : 6.0);
  const double alpha_lo = fact * t.config.sigma_l / denom;
  const double alpha_hi = fact * t.config.sigma_u / denom;
  auto flag = [&cc](int k, const std::string& what) {
    ++cc.violations;
    if (cc.first_violation.empty())
      cc.first_violation = "k=" + std::to_string(k) + ": " + what;
  };
  for (const IterRecord& r : t.records) {
    ++cc.checked;
    if (r.residual_ratio > sigma_hat) flag(r.k, "approximate-solution certificate exceeded");
    if (r.large_step) {
      const double prod = large_step_product(r.lambda, r.step_norm, d);
      if (prod < alpha_lo || prod > alpha_hi) flag(r.k, "two-sided large-step condition violated");
      if (r.prop32_lhs > sigma * sigma * r.step_norm * r.step_norm)
        flag(r.k, "sigma-relation for v violated");
    }
  }
  return cc;
}

std::optional<double> k_eps_outer_bound(const RunTrace& t, const Problem& p) {
  if (!p.known_optimum()) return std::nullopt;
  const double dist = (t.x0 - p.known_optimum()->x_star).norm();
  if (dist <= 0.0) return 1.0;
  const int d = t.config.d;
  const double sigma = t.config.sigma();
  const double fact = d == 1 ? 1.0 : (d == 2 ? 2.0 : 6.0);
  const double eps_target = 2.0 * t.config.eps_bar;
  const double expo = 2.0 / (3.0 * d + 1.0);
  const double val =
      0.5 * (d + 1.0) *
      std::pow(std::pow(2.0, d) / (std::pow(1.0 - sigma * sigma, 0.5 * (d - 1.0)) * fact *
                                   t.config.sigma_l),
               expo) *
      std::pow((p.lipschitz(d) + t.config.m_reg) * std::pow(dist, d + 1.0) / eps_target, expo);
  return std::ceil(val);
}

json trace_summary(const RunTrace& t, const Problem& p, double f_star) {
  json j;
  j["problem"] = t.problem;
  j["method"] = t.method;
  j["d"] = t.config.d;
  j["termination"] = to_string(t.termination);
  j["iterations"] = t.records.size();
  j["final_F"] = t.records.empty() ? p.objective(t.x0) : t.records.back().f_y;
  j["final_F_gap"] = t.records.empty() ? p.objective(t.x0) - f_star
                                       : t.records.back().f_y - f_star;
  long bisect_total = 0, ats_total = 0;
  for (const IterRecord& r : t.records) {
    bisect_total += r.bisect_steps;
    ats_total += r.ats_inner;
  }
  j["total_bisection_steps"] = bisect_total;
  j["total_ats_inner_iterations"] = ats_total;
  j["oracle_queries_full_order"] = t.oracle_full;
  j["oracle_queries_gradient"] = t.oracle_grad;
  j["total_oracle_calls"] = t.oracle_full + t.oracle_grad;
  j["config"] = {{"sigma_hat", t.config.sigma_hat()}, {"sigma_l", t.config.sigma_l},
                 {"sigma_u", t.config.sigma_u},       {"M", t.config.m_reg},
                 {"rho_bar", t.config.rho_bar},       {"eps_bar", t.config.eps_bar},
                 {"max_outer", t.config.max_outer},   {"max_bisect", t.config.max_bisect},
                 {"kappa", t.config.ats.kappa}};
  if (auto ke = k_eps_outer_bound(t, p))
    j["k_eps_outer_bound"] = *ke;  // bisection log factor excluded
  return j;
}

int cmd_run(const CommonOpts& o) {
  Problem p = make_problem(o.problem, o.n, o.m, o.seed);
  const MethodSpec ms = parse_method(o.method, o.d);

  if (ms.kind == "optimal") {
    const SolverConfig cfg = resolve_config(p, to_solver_config(o, ms.d));
    const auto violations = validate_config(cfg, p);
    if (!violations.empty()) {
      std::cerr << "invalid configuration:\n";
      for (const auto& v : violations) std::cerr << "  - " << v << "\n";
      return kExitUsage;
    }
  }

  RunTrace trace = execute(p, ms, o);
  if (p.known_optimum()) trace.dist_opt = (trace.x0 - p.known_optimum()->x_star).norm();
  const double f_star = resolve_f_star(trace, p);

  write_trace_csv(o.out + ".csv", trace, f_star);
  json summary = trace_summary(trace, p, f_star);

  int exit_code = kExitOk;
  if (o.check_certs && ms.kind == "optimal") {
    const CertificateCheck cc = check_certificates(trace, p);
    summary["certificate_check"] = {{"iterations_checked", cc.checked},
                                    {"violations", cc.violations},
                                    {"first_violation", cc.first_violation}};
    if (cc.violations > 0) {
      std::cerr << "certificate violations: " << cc.violations << " (" << cc.first_violation
                << ")\n";
      exit_code = kExitCertificate;
    }
  }

  for (const std::string& rep : o.reports) {
    if (rep == "potential") {
      if (!p.known_optimum()) {
        summary["report_potential"] = {{"skipped", "no known optimum"}};
        std::cout << "report potential: skipped (no known optimum)\n";
      } else {
        const PotentialReport pr = check_potential(trace, p);
        summary["report_potential"] = {{"all_ok", pr.all_ok},
                                       {"D", pr.dist},
                                       {"iterations", pr.rows.size()}};
        std::cout << "report potential: " << (pr.all_ok ? "OK" : "VIOLATED") << " over "
                  << pr.rows.size() << " iterations\n";
      }
    } else if (rep == "rate") {
      if (!p.known_optimum()) {
        summary["report_rate"] = {{"skipped", "no known optimum"}};
        std::cout << "report rate: skipped (no known optimum)\n";
      } else {
        const RateReport rr = check_rate_bound(trace, p);
        summary["report_rate"] = {{"all_ok", rr.all_ok},
                                  {"recursion_applicable", rr.recursion_applicable},
                                  {"checked_prefix", rr.checked_prefix}};
        std::cout << "report rate: " << (rr.all_ok ? "OK" : "VIOLATED") << " over prefix "
                  << rr.checked_prefix << "\n";
      }
    } else if (rep == "bisect") {
      const auto rows = step_count_report({trace});
      summary["report_bisect"] = {{"max_steps", rows[0].max_steps},
                                  {"mean_steps", rows[0].mean_steps},
                                  {"log2_inv_rho", rows[0].log2_inv_rho},
                                  {"log2_inv_eps", rows[0].log2_inv_eps}};
      std::cout << "report bisect: max " << rows[0].max_steps << " mean " << rows[0].mean_steps
                << " per outer iteration\n";
    } else {
      std::cerr << "unknown report '" << rep << "' (available: potential, rate, bisect)\n";
      return kExitUsage;
    }
  }

  std::ofstream js(o.out + ".json", std::ios::binary);
  js << summary.dump(2) << "\n";
  js.close();

  std::cout << "run " << trace.method << " on " << trace.problem << ": "
            << to_string(trace.termination) << " after " << trace.records.size()
            << " iterations, final F gap " << format_double(summary["final_F_gap"].get<double>())
            << "\n";
  if (trace.termination == Termination::BisectFailed) return kExitSolver;
  return exit_code;
}

int cmd_compare(const CommonOpts& o) {
  std::vector<std::string> tokens;
  {
    std::string cur;
    for (char c : o.methods_csv) {
      if (c == ',') {
        if (!cur.empty()) tokens.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(cur);
  }
  if (tokens.size() < 2) {
    std::cerr << "compare needs at least two methods (--methods a,b,...)\n";
    return kExitUsage;
  }

  Problem p = make_problem(o.problem, o.n, o.m, o.seed);
  std::vector<MethodSpec> specs;
  for (const auto& tk : tokens) specs.push_back(parse_method(tk, o.d));

  std::vector<RunTrace> traces;
  traces.reserve(specs.size());
  for (const auto& ms : specs) traces.push_back(execute(p, ms, o));

  double f_star;
  if (p.known_optimum()) {
    f_star = p.known_optimum()->f_star;
  } else {
    f_star = std::numeric_limits<double>::infinity();
    for (const auto& t : traces)
      for (const auto& r : t.records) f_star = std::min(f_star, r.f_y);
  }

  std::size_t max_len = 0;
  for (const auto& t : traces) max_len = std::max(max_len, t.records.size());

  std::ofstream out(o.out + ".csv", std::ios::binary);
  if (!out) {
    std::cerr << "cannot open " << o.out << ".csv\n";
    return kExitUsage;
  }
  out << "k";
  for (const auto& t : traces) out << ",gap_" << t.method;
  out << "\n";
  for (std::size_t i = 0; i < max_len; ++i) {
    out << (i + 1);
    for (const auto& t : traces) {
      out << ',';
      if (i < t.records.size()) out << format_double(t.records[i].f_y - f_star);
    }
    out << "\n";
  }
  out.close();

  json summary;
  summary["problem"] = p.name();
  summary["gap_tol"] = o.gap_tol;
  summary["f_star"] = f_star;
  json methods = json::array();
  for (const auto& t : traces) {
    int to_tol = -1;
    for (const auto& r : t.records) {
      if (r.f_y - f_star <= o.gap_tol) {
        to_tol = r.k;
        break;
      }
    }
    methods.push_back({{"method", t.method},
                       {"iterations", t.records.size()},
                       {"iterations_to_tol", to_tol},
                       {"termination", to_string(t.termination)}});
    std::cout << t.method << ": " << (to_tol >= 0 ? std::to_string(to_tol) : "never")
              << " iterations to gap " << o.gap_tol << "\n";
  }
  summary["methods"] = methods;
  std::ofstream js(o.out + ".json", std::ios::binary);
  js << summary.dump(2) << "\n";
  return kExitOk;
}

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--problem", o.problem, "built-in problem name")->required();
  sub->add_option("--n", o.n, "dimension (0: problem default)");
  sub->add_option("--m", o.m, "sample count (0: problem default)");
  sub->add_option("--seed", o.seed, "instance seed (default 42)");
  sub->add_option("--d", o.d, "derivative order 1..3");
  sub->add_option("--sigma-hat", o.sigma_hat, "inexactness parameter");
  sub->add_option("--sigma-l", o.sigma_l, "lower large-step factor");
  sub->add_option("--sigma-u", o.sigma_u, "upper large-step factor");
  sub->add_option("--M", o.m_reg, "model regularization weight (0: auto)");
  sub->add_option("--rho-bar", o.rho_bar, "residual stopping tolerance");
  sub->add_option("--eps-bar", o.eps_bar, "eps stopping tolerance");
  sub->add_option("--max-outer", o.max_outer, "outer iteration cap");
  sub->add_option("--max-bisect", o.max_bisect, "bisection step cap per iteration");
  sub->add_option("--kappa", o.kappa, "d=3 Bregman ratio (>1)");
  sub->add_option("--inner-accept-slack", o.inner_slack,
                  "testing hook: widen the inner acceptance test");
  sub->add_option("--out", o.out, "output path prefix (.csv/.json)");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"benchmark harness for the composite high-order solver library"};
  app.require_subcommand(1);

  CommonOpts ro;
  CLI::App* run_cmd = app.add_subcommand("run", "run one method on one problem");
  add_common(run_cmd, ro);
  run_cmd->add_option("--method", ro.method, "optimal | gd | agd | basic (optional -dK suffix)");
  run_cmd->add_flag("--check-certificates", ro.check_certs,
                    "fail (exit 3) if any per-iteration certificate is violated");
  run_cmd->add_option("--report", ro.reports, "extra reports: potential, rate, bisect");

  CommonOpts co;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "run several methods on one problem");
  add_common(cmp_cmd, co);
  cmp_cmd->add_option("--methods", co.methods_csv, "comma-separated method list")->required();
  cmp_cmd->add_option("--gap-tol", co.gap_tol, "target F gap for the iteration count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(ro);
    if (cmp_cmd->parsed()) return cmd_compare(co);
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("hotm-bench");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace hotm::cli
