// SPDX-License-Identifier: MIT
//
// constraints.hpp — equality constraints h(x) = 0 for the augmented
// Lagrangian solver.  Implementations expose the value, the action of Jhᵀ,
// and the Gram contribution JhᵀJh so the solver never materializes Jh unless
// a caller explicitly asks for the dense matrix.

#pragma once

#include "fmmkit/types.hpp"

#include <vector>

namespace fmm {

struct EqualityConstraint {
  virtual ~EqualityConstraint() = default;
  // Number of constraint rows for an n-dimensional variable vector.
  virtual Index rows(Index n) const = 0;
  virtual Vec value(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;  // rows(n) × n dense
  virtual Vec jt_apply(const Vec& x, const Vec& y) const = 0;  // Jhᵀ·y
  virtual void add_gram(const Vec& x, Mat& H) const = 0;       // H += JhᵀJh
};

// No constraints (h has zero rows).
struct NoConstraint final : EqualityConstraint {
  Index rows(Index) const override { return 0; }
  Vec value(const Vec& x) const override { return Vec(0); }
  Mat jacobian(const Vec& x) const override { return Mat(0, x.size()); }
  Vec jt_apply(const Vec& x, const Vec&) const override {
    return Vec::Zero(x.size());
  }
  void add_gram(const Vec&, Mat&) const override {}
};

// h_i(x) = x_i³ − x_i for every variable: feasible points have all entries
// in {−1, 0, 1}.  Jh = diag(3x² − 1).
struct DiscretenessConstraint final : EqualityConstraint {
  Index rows(Index n) const override { return n; }
  Vec value(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  Vec jt_apply(const Vec& x, const Vec& y) const override;
  void add_gram(const Vec& x, Mat& H) const override;
};

// h = x(I): pins the selected variables to zero.  Used to probe whether a
// decomposition stays exact when chosen (near-)zero entries are forced to
// exact zeros.
struct IndexPinConstraint final : EqualityConstraint {
  std::vector<Index> idx;

  explicit IndexPinConstraint(std::vector<Index> indices)
      : idx(std::move(indices)) {}

  Index rows(Index) const override { return static_cast<Index>(idx.size()); }
  Vec value(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  Vec jt_apply(const Vec& x, const Vec& y) const override;
  void add_gram(const Vec& x, Mat& H) const override;
};

// Indices i with |x_i| < tol — the usual way to choose the pin set.
std::vector<Index> select_near_zero(const Vec& x, double tol);

}  // namespace fmm
