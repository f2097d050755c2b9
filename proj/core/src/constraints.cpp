// SPDX-License-Identifier: MIT

#include "fmmkit/constraints.hpp"

#include <cmath>

namespace fmm {

Vec DiscretenessConstraint::value(const Vec& x) const {
  return x.array() * (x.array().square() - 1.0);
}

Mat DiscretenessConstraint::jacobian(const Vec& x) const {
  Mat J = Mat::Zero(x.size(), x.size());
  J.diagonal() = 3.0 * x.array().square() - 1.0;
  return J;
}

Vec DiscretenessConstraint::jt_apply(const Vec& x, const Vec& y) const {
  return (3.0 * x.array().square() - 1.0) * y.array();
}

void DiscretenessConstraint::add_gram(const Vec& x, Mat& H) const {
  H.diagonal().array() += (3.0 * x.array().square() - 1.0).square();
}

Vec IndexPinConstraint::value(const Vec& x) const {
  Vec h(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) h[static_cast<Index>(i)] = x[idx[i]];
  return h;
}

Mat IndexPinConstraint::jacobian(const Vec& x) const {
  Mat J = Mat::Zero(static_cast<Index>(idx.size()), x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) J(static_cast<Index>(i), idx[i]) = 1.0;
  return J;
}

Vec IndexPinConstraint::jt_apply(const Vec& x, const Vec& y) const {
  Vec out = Vec::Zero(x.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[idx[i]] += y[static_cast<Index>(i)];
  return out;
}

void IndexPinConstraint::add_gram(const Vec&, Mat& H) const {
  for (Index i : idx) H(i, i) += 1.0;
}

std::vector<Index> select_near_zero(const Vec& x, double tol) {
  std::vector<Index> out;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) < tol) out.push_back(i);
  return out;
}

}  // namespace fmm
