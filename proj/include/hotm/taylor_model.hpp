#pragma once

// Regularized d-th order Taylor model of the smooth part f around an anchor:
//   f_x(y) = f(x) + sum_{k=1..d} (1/k!) D^k f(x)[y-x]^k + M/(d+1)! ||y-x||^{d+1}

#include "hotm/multilinear.hpp"
#include "hotm/oracle.hpp"

#include <utility>

namespace hotm {

class TaylorModel {
 public:
  /// The bundle must carry derivatives up to order d; it is stored by value,
  /// so one oracle call per anchor serves every evaluation at that anchor.
  TaylorModel(Vec anchor, DerivativeBundle bundle, double regularization, int order);

  const Vec& anchor() const { return anchor_; }
  const DerivativeBundle& bundle() const { return bundle_; }
  double regularization() const { return m_; }
  int order() const { return d_; }
  int dim() const { return static_cast<int>(anchor_.size()); }

  double value(const Vec& y) const;
  Vec gradient(const Vec& y) const;

 private:
  Vec anchor_;
  DerivativeBundle bundle_;
  double m_;
  int d_;
};

/// Lemma-style gap check: returns (||grad f(y) - grad f_x(y)||,
/// (L_d + M)/d! * ||y-x||^d). The first is bounded by the second whenever
/// the problem's L_d is valid.
std::pair<double, double> gap_bound_check(const Problem& p, const TaylorModel& m, const Vec& y);

}  // namespace hotm
