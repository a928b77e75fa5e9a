#pragma once

#include <cstddef>
#include <vector>

#include "thermavg/distinguish.hpp"
#include "thermavg/qcore.hpp"
#include "thermavg/thermal.hpp"

namespace thermavg {

/// Zero-sum reals a_1..a_d and a subset size k <= d/3.
struct SubsetSelectionProblem {
  RVector values;
  Index k = 1;

  void validate() const;
};

struct SubsetSelection {
  /// k indices into `values`, in the order they were picked.
  std::vector<Index> indices;
  /// True when the signs were flipped so that at most d/2 values are positive.
  bool flipped = false;
  /// 1 when k does not exceed the number of positives, 2 otherwise.
  int proof_case = 1;
};

/// Picks k indices with |sum_j a_{n_j}| >= (k/d) sum_n |a_n|. Sorts the
/// (possibly negated) values in decreasing order and takes the first k, which
/// covers both the "top k positives" and the "all positives plus the largest
/// of the rest" cases.
SubsetSelection select_subset(const SubsetSelectionProblem& prob);

/// Smallest k with 4k >= d; throws when no integer k satisfies d/4 <= k <= d/3.
Index default_witness_k(Index d);
/// Throws unless d/4 <= k <= d/3.
void validate_witness_k(Index d, Index k);

struct WitnessReport {
  TimeAveragedState omega;
  Index k = 0;
  double achieved_deff = 0.0;
  /// D(omega, Omega).
  double lhs = 0.0;
  /// Lower bound the construction guarantees.
  double rhs = 0.0;
  bool satisfied = false;

  /// The band-basis indices mixed into omega.
  std::vector<Index> chosen;
  /// POVM (finite case) or operator-basis element (subsystem case) used.
  std::size_t selector = 0;
  /// Outcome within the POVM (finite case only).
  std::size_t outcome = 0;
  int proof_case = 1;
};

/// Equal mixture of k band eigenstates built against one measurement: the
/// POVM maximising (1/N(M)) mean_n D_M(rho_n, Omega), its outcome maximising
/// sum_n |a_n|, then select_subset on a_n = tr(M_r (rho_n - Omega)).
/// lhs = D_set(omega, Omega), rhs = D_mean / N_M.
WitnessReport witness_state_finite(const EnergyBand& band, const SpectralSystem& sys,
                                   const MeasurementSet& ms, Index k);
/// Same, with the band basis given explicitly (columns = band vectors).
WitnessReport witness_state_finite(const CMatrix& basis, const MeasurementSet& ms, Index k);

/// As above with a_n = tr((rho_n^S - Omega^S) e_i) for the operator-basis
/// element maximising sum_n |a_n|. rhs = d_S^{-5/2} mean_n D(rho_n^S, Omega^S).
WitnessReport witness_state_subsystem(const EnergyBand& band, const SpectralSystem& sys,
                                      const SubsystemPartition& part, Index k);
WitnessReport witness_state_subsystem(const CMatrix& basis, const SubsystemPartition& part,
                                      Index k);

/// Dispatches on the scheme.
WitnessReport witness_state(const CMatrix& basis, const MeasurementScheme& scheme, Index k);

/// Every witness the proof could have used: one per POVM (finite case) or one
/// per operator-basis element (subsystem case), each with its best outcome.
/// Elements with sum_n |a_n| = 0 are skipped.
std::vector<WitnessReport> all_witnesses(const CMatrix& basis, const MeasurementScheme& scheme,
                                         Index k);

// -----------------------------------------------------------------------------

struct CounterexampleCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
  std::string details;
};

struct CounterexampleReport {
  Index d = 0;
  /// D(rho_n, Omega) for each n.
  RVector per_eigenstate;
  double mean = 0.0;
  std::vector<CounterexampleCheck> checks;
  bool all_passed() const;
};

/// Diagonal H with distinct energies 0..d-1 and the eigenbasis measurement
/// set {|n><n|, I - |n><n|}. Checks (a) every eigenstate sits at 1 - 1/d,
/// (b) random band states satisfy D(omega, Omega) = max_m |p_m - 1/d| <=
/// 1/sqrt(d_eff), and (c) outcome probabilities do not move under time
/// evolution.
CounterexampleReport counterexample_suite(Index d, std::uint64_t seed = 0,
                                          int n_states = 50, int n_times = 10);

}  // namespace thermavg
