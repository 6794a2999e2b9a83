#include "hotm/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hotm {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double resolve_f_star(const RunTrace& t, const Problem& p) {
  if (p.known_optimum()) return p.known_optimum()->f_star;
  double best = std::numeric_limits<double>::infinity();
  for (const IterRecord& r : t.records) best = std::min(best, r.f_y);
  return std::isfinite(best) ? best : 0.0;
}

std::string trace_csv_string(const RunTrace& t, double f_star) {
  std::ostringstream os;
  os << "k,A_k,lambda_k,beta_k,bisect_steps,ats_inner,norm_v,eps,F_gap,step_norm,"
        "residual_ratio\n";
  for (const IterRecord& r : t.records) {
    os << r.k << ',' << format_double(r.a_total) << ',' << format_double(r.lambda) << ','
       << format_double(r.beta) << ',' << r.bisect_steps << ',' << r.ats_inner << ','
       << format_double(r.norm_v) << ',' << format_double(r.eps) << ','
       << format_double(r.f_y - f_star) << ',' << format_double(r.step_norm) << ','
       << format_double(r.residual_ratio) << '\n';
  }
  return os.str();
}

void write_trace_csv(const std::string& path, const RunTrace& t, double f_star) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << trace_csv_string(t, f_star);
}

RateFit fit_rate(const RunTrace& t, double f_star, int k_lo, int k_hi) {
  std::vector<double> xs, ys;
  for (const IterRecord& r : t.records) {
    if (r.k < k_lo || r.k > k_hi) continue;
    const double gap = r.f_y - f_star;
    if (!(gap > 0.0))
      throw std::domain_error("fit_rate: nonpositive gap at k=" + std::to_string(r.k));
    xs.push_back(std::log(double(r.k)));
    ys.push_back(std::log(gap));
  }
  if (xs.size() < 2) throw std::domain_error("fit_rate: fewer than two points in range");

  const double n = double(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  RateFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 0.0) {
    fit.r2 = 1.0;  // constant data is fit exactly
  } else {
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
      ssr += e * e;
    }
    fit.r2 = 1.0 - ssr / syy;
  }
  return fit;
}

}  // namespace hotm
