#pragma once

namespace thermavg {

/// Numerical tolerances shared by every invariant check in the library.
///
/// The record is read-only during computation. A driver may install
/// overrides once at startup (see set_tolerances) before any worker starts.
struct Tolerances {
  double hermiticity = 1e-12;     // |A_ij - conj(A_ji)|, relative to max(1, max|A|)
  double trace = 1e-10;           // |tr(rho) - 1|
  double psd = 1e-10;             // minimum eigenvalue >= -psd
  double gram = 1e-10;            // eigenvector Gram matrix vs identity
  double reconstruction = 1e-9;   // spectral norm of V diag(E) V^dagger - H
  double degeneracy = 1e-9;       // relative to max(1, spectral range)
  double povm_sum = 1e-10;        // sum of POVM outcomes vs identity
  double weight = 1e-12;          // negative-weight slack for probability vectors
  double tails_zero = 1e-12;      // delta below this means "no tails"
  double projector = 1e-10;       // idempotency of band projectors
  double bound_pass = 1e-8;       // lhs <= rhs + bound_pass
  double gap = 1e-9;              // absolute tolerance for gap coincidences
};

const Tolerances& tolerances();

/// Replaces the process-wide tolerances. Not thread-safe; call before any
/// concurrent work begins.
void set_tolerances(const Tolerances& tol);

}  // namespace thermavg
