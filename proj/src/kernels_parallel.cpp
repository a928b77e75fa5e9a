#include <cmath>

#include "thermavg/kernels.hpp"

namespace thermavg::kernels::parallel {

namespace {
std::vector<const Outcome*> flatten(const MeasurementSet& ms) {
  std::vector<const Outcome*> flat;
  flat.reserve(ms.total_outcomes());
  for (const auto& p : ms.povms())
    for (const auto& o : p.outcomes()) flat.push_back(&o);
  return flat;
}
}  // namespace

RMatrix outcome_overlaps(const MeasurementSet& ms, const CMatrix& basis) {
  const auto flat = flatten(ms);
  const auto n_out = static_cast<Index>(flat.size());
  const Index n_cols = basis.cols();
  RMatrix q(n_out, n_cols);
#pragma omp parallel for collapse(2) schedule(static)
  for (Index r = 0; r < n_out; ++r)
    for (Index n = 0; n < n_cols; ++n)
      q(r, n) = flat[static_cast<std::size_t>(r)]->expectation(CVector(basis.col(n)));
  return q;
}

std::vector<CMatrix> reduced_states(const CMatrix& basis, const SubsystemPartition& part) {
  part.validate(basis.rows());
  std::vector<CMatrix> out(static_cast<std::size_t>(basis.cols()));
#pragma omp parallel for schedule(static)
  for (Index n = 0; n < basis.cols(); ++n)
    out[static_cast<std::size_t>(n)] = reduced_pure(CVector(basis.col(n)), part);
  return out;
}

RVector trace_distances_to(const std::vector<CMatrix>& states, const CMatrix& reference) {
  const auto n = static_cast<Index>(states.size());
  RVector out(n);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i)
    out(i) = trace_distance(states[static_cast<std::size_t>(i)], reference);
  return out;
}

RVector distinguishability_trace(const MeasurementSet& ms_energy, const CMatrix& rho0_energy,
                                 const CMatrix& omega_energy, const RVector& energies,
                                 const RVector& times) {
  const auto flat = flatten(ms_energy);
  const Index d = energies.size();
  const auto n_out = static_cast<Index>(flat.size());
  RVector q(n_out);
  for (Index r = 0; r < n_out; ++r) q(r) = flat[static_cast<std::size_t>(r)]->expectation(omega_energy);

  RVector out(times.size());
#pragma omp parallel
  {
    CMatrix rho_t(d, d);
    RVector p(n_out);
#pragma omp for schedule(static)
    for (Index k = 0; k < times.size(); ++k) {
      const double t = times(k);
      for (Index n = 0; n < d; ++n)
        for (Index m = 0; m < d; ++m)
          rho_t(m, n) = std::polar(1.0, -(energies(m) - energies(n)) * t) * rho0_energy(m, n);
      for (Index r = 0; r < n_out; ++r) p(r) = flat[static_cast<std::size_t>(r)]->expectation(rho_t);
      out(k) = povm_max(ms_energy, p, q).value;
    }
  }
  return out;
}

RVector subsystem_distance_trace(const CMatrix& eigenvectors, const CVector& coeffs,
                                 const RVector& energies, const CMatrix& omega_s,
                                 const SubsystemPartition& part, const RVector& times) {
  part.validate(eigenvectors.rows());
  const Index d = energies.size();
  RVector out(times.size());
#pragma omp parallel
  {
    CVector ct(d);
#pragma omp for schedule(static)
    for (Index k = 0; k < times.size(); ++k) {
      for (Index n = 0; n < d; ++n) ct(n) = std::polar(1.0, -energies(n) * times(k)) * coeffs(n);
      const CVector psi = eigenvectors * ct;
      out(k) = trace_distance(reduced_pure(psi, part), omega_s);
    }
  }
  return out;
}

}  // namespace thermavg::kernels::parallel
