#include <cmath>

#include "thermavg/kernels.hpp"

namespace thermavg::kernels::serial {

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
  RMatrix q(static_cast<Index>(flat.size()), basis.cols());
  for (std::size_t r = 0; r < flat.size(); ++r)
    for (Index n = 0; n < basis.cols(); ++n)
      q(static_cast<Index>(r), n) = flat[r]->expectation(CVector(basis.col(n)));
  return q;
}

std::vector<CMatrix> reduced_states(const CMatrix& basis, const SubsystemPartition& part) {
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(basis.cols()));
  for (Index n = 0; n < basis.cols(); ++n)
    out.push_back(partial_trace(CMatrix(basis.col(n) * basis.col(n).adjoint()), part));
  return out;
}

RVector trace_distances_to(const std::vector<CMatrix>& states, const CMatrix& reference) {
  RVector out(static_cast<Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i)
    out(static_cast<Index>(i)) = trace_distance(states[i], reference);
  return out;
}

RVector distinguishability_trace(const MeasurementSet& ms_energy, const CMatrix& rho0_energy,
                                 const CMatrix& omega_energy, const RVector& energies,
                                 const RVector& times) {
  const auto flat = flatten(ms_energy);
  const Index d = energies.size();
  RVector q(static_cast<Index>(flat.size()));
  for (std::size_t r = 0; r < flat.size(); ++r)
    q(static_cast<Index>(r)) = flat[r]->expectation(omega_energy);

  RVector out(times.size());
  CMatrix rho_t(d, d);
  RVector p(q.size());
  for (Index k = 0; k < times.size(); ++k) {
    const double t = times(k);
    for (Index n = 0; n < d; ++n)
      for (Index m = 0; m < d; ++m)
        rho_t(m, n) = std::polar(1.0, -(energies(m) - energies(n)) * t) * rho0_energy(m, n);
    for (std::size_t r = 0; r < flat.size(); ++r)
      p(static_cast<Index>(r)) = flat[r]->expectation(rho_t);
    out(k) = povm_max(ms_energy, p, q).value;
  }
  return out;
}

RVector subsystem_distance_trace(const CMatrix& eigenvectors, const CVector& coeffs,
                                 const RVector& energies, const CMatrix& omega_s,
                                 const SubsystemPartition& part, const RVector& times) {
  const Index d = energies.size();
  RVector out(times.size());
  CVector ct(d);
  for (Index k = 0; k < times.size(); ++k) {
    for (Index n = 0; n < d; ++n) ct(n) = std::polar(1.0, -energies(n) * times(k)) * coeffs(n);
    const CVector psi = eigenvectors * ct;
    out(k) = trace_distance(partial_trace(CMatrix(psi * psi.adjoint()), part), omega_s);
  }
  return out;
}

}  // namespace thermavg::kernels::serial
