#pragma once

// Data-parallel inner loops. Every kernel exists twice: `serial::` is the
// plain reference used in tests, `parallel::` is the OpenMP version used by
// the library. Each parallel iteration writes its own output slot and every
// reduction runs afterwards in a fixed order, so both produce identical bits
// regardless of thread count.

#include <vector>

#include "thermavg/qcore.hpp"

namespace thermavg::kernels {

/// Flattened outcome probabilities of `ms` (row r = outcome r in set order)
/// minus the reference probabilities `q`, maximised per POVM:
/// max_M (1/2) sum_{r in M} |p_r - q_r|. Ties go to the lowest POVM index.
struct PovmMax {
  double value = 0.0;
  std::size_t povm = 0;
};
PovmMax povm_max(const MeasurementSet& ms, const RVector& p, const RVector& q);

/// Re-expresses every outcome in the basis given by the columns of `basis`
/// (M -> B^dagger M B). `basis` must be unitary.
MeasurementSet to_basis(const MeasurementSet& ms, const CMatrix& basis);

namespace serial {

/// Q(r, n) = <b_n| M_r |b_n> for every flattened outcome r and column b_n.
RMatrix outcome_overlaps(const MeasurementSet& ms, const CMatrix& basis);

/// Reduced subsystem state of each column of `basis`.
std::vector<CMatrix> reduced_states(const CMatrix& basis, const SubsystemPartition& part);

/// trace_distance(states[i], reference) for all i.
RVector trace_distances_to(const std::vector<CMatrix>& states, const CMatrix& reference);

/// D_M(rho(t), omega) for each time, everything expressed in the energy
/// eigenbasis: rho(t)_{mn} = exp(-i (E_m - E_n) t) rho0_{mn}.
RVector distinguishability_trace(const MeasurementSet& ms_energy, const CMatrix& rho0_energy,
                                 const CMatrix& omega_energy, const RVector& energies,
                                 const RVector& times);

/// Subsystem trace distance between the reduced state of a pure evolving
/// state and `omega_s`. `coeffs` are energy-basis amplitudes, `eigenvectors`
/// maps them back to the computational basis.
RVector subsystem_distance_trace(const CMatrix& eigenvectors, const CVector& coeffs,
                                 const RVector& energies, const CMatrix& omega_s,
                                 const SubsystemPartition& part, const RVector& times);

}  // namespace serial

namespace parallel {

RMatrix outcome_overlaps(const MeasurementSet& ms, const CMatrix& basis);
std::vector<CMatrix> reduced_states(const CMatrix& basis, const SubsystemPartition& part);
RVector trace_distances_to(const std::vector<CMatrix>& states, const CMatrix& reference);
RVector distinguishability_trace(const MeasurementSet& ms_energy, const CMatrix& rho0_energy,
                                 const CMatrix& omega_energy, const RVector& energies,
                                 const RVector& times);
RVector subsystem_distance_trace(const CMatrix& eigenvectors, const CVector& coeffs,
                                 const RVector& energies, const CMatrix& omega_s,
                                 const SubsystemPartition& part, const RVector& times);

}  // namespace parallel

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace thermavg::kernels
