#include "hotm/taylor_model.hpp"

#include <cmath>
#include <stdexcept>

namespace hotm {

namespace {
constexpr double kFactorial[5] = {1.0, 1.0, 2.0, 6.0, 24.0};
}

TaylorModel::TaylorModel(Vec anchor, DerivativeBundle bundle, double regularization, int order)
    : anchor_(std::move(anchor)), bundle_(std::move(bundle)), m_(regularization), d_(order) {
  if (d_ < 1 || d_ > 3) throw std::invalid_argument("TaylorModel: order must be in {1,2,3}");
  if (m_ < 0.0) throw std::invalid_argument("TaylorModel: regularization must be nonnegative");
  if (bundle_.gradient.size() != anchor_.size())
    throw std::invalid_argument("TaylorModel: bundle/anchor dimension mismatch");
  if (d_ >= 2 && !bundle_.hessian) throw std::invalid_argument("TaylorModel: missing Hessian");
  if (d_ >= 3 && !bundle_.third)
    throw std::invalid_argument("TaylorModel: missing third derivative");
}

double TaylorModel::value(const Vec& y) const {
  if (y.size() != anchor_.size()) throw std::invalid_argument("TaylorModel::value: dimension");
  const Vec z = y - anchor_;
  double v = bundle_.value + bundle_.gradient.dot(z);
  if (d_ >= 2) v += 0.5 * bundle_.hessian->quadratic_form(z);
  if (d_ >= 3) v += contract3_full(*bundle_.third, z, z, z) / 6.0;
  const double r = z.norm();
  v += m_ / kFactorial[d_ + 1] * std::pow(r, d_ + 1);
  return v;
}

Vec TaylorModel::gradient(const Vec& y) const {
  if (y.size() != anchor_.size())
    throw std::invalid_argument("TaylorModel::gradient: dimension");
  const Vec z = y - anchor_;
  Vec g = bundle_.gradient;
  if (d_ >= 2) g += bundle_.hessian->apply(z);
  if (d_ >= 3) g += 0.5 * contract3_to_matrix(*bundle_.third, z).apply(z);
  const double r = z.norm();
  // regularizer gradient: M/d! * ||z||^{d-1} z
  double coeff = m_ / kFactorial[d_];
  if (d_ == 2) coeff *= r;
  if (d_ == 3) coeff *= r * r;
  g += coeff * z;
  return g;
}

std::pair<double, double> gap_bound_check(const Problem& p, const TaylorModel& m, const Vec& y) {
  const Vec grad_f = p.query(y, 1).gradient;
  const double lhs = (grad_f - m.gradient(y)).norm();
  const double r = (y - m.anchor()).norm();
  const double rhs =
      (p.lipschitz(m.order()) + m.regularization()) / kFactorial[m.order()] * std::pow(r, m.order());
  return {lhs, rhs};
}

}  // namespace hotm
