#pragma once

// Small independent oracles shared by the unit tests. Deliberately naive:
// full matrices, direct formulas, no reuse of library shortcuts.

#include <Eigen/Eigenvalues>

#include "thermavg/qcore.hpp"
#include "thermavg/rng.hpp"

namespace testing {

using thermavg::CMatrix;
using thermavg::CVector;
using thermavg::Index;
using thermavg::RVector;

/// (1/2) sum |eig(a - b)| straight from an eigensolver.
inline double trace_distance_oracle(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Partial trace by explicit index loops.
inline CMatrix partial_trace_oracle(const CMatrix& x, Index ds, Index db, bool first) {
  CMatrix r = CMatrix::Zero(ds, ds);
  for (Index s = 0; s < ds; ++s)
    for (Index t = 0; t < ds; ++t)
      for (Index b = 0; b < db; ++b) {
        const Index i = first ? s * db + b : b * ds + s;
        const Index j = first ? t * db + b : b * ds + t;
        r(s, t) += x(i, j);
      }
  return r;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline CMatrix random_density(Index d, thermavg::Rng& rng) {
  const CMatrix g = thermavg::complex_gaussian_matrix(d, d, rng);
  CMatrix r = g * g.adjoint();
  return r / r.trace().real();
}

inline CMatrix projector(const CVector& v) { return v * v.adjoint() / v.squaredNorm(); }

}  // namespace testing
