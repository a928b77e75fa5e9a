#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "thermavg/qcore.hpp"
#include "thermavg/thermal.hpp"

namespace thermavg {

/// Either a finite measurement set, or "every POVM on a subsystem", which
/// reduces to the subsystem trace distance.
using MeasurementScheme = std::variant<MeasurementSet, SubsystemPartition>;

/// N_M for a measurement set, d_S for a subsystem.
std::size_t measuring_power(const MeasurementScheme& scheme);
bool is_subsystem(const MeasurementScheme& scheme);

/// (1/2) sum_r |tr(M_r (rho - sigma))|.
double dist_single(const DensityMatrix& rho, const DensityMatrix& sigma, const Povm& m);

struct SetDistinguishability {
  double value = 0.0;
  /// Maximising POVM; lowest index on ties.
  std::size_t povm_index = 0;
};
SetDistinguishability dist_set(const DensityMatrix& rho, const DensityMatrix& sigma,
                               const MeasurementSet& ms);

/// Trace distance of the reduced states.
double subsystem_distance(const DensityMatrix& rho, const DensityMatrix& sigma,
                          const SubsystemPartition& part);

/// Dispatches to dist_set or subsystem_distance.
double distinguishability(const DensityMatrix& rho, const DensityMatrix& sigma,
                          const MeasurementScheme& scheme);

/// Precomputed view of a band basis under a measurement scheme. Gives every
/// D(rho_n, Omega) and cheap distances for mixtures sum_n w_n rho_n, with
/// Omega the uniform mixture of the basis columns.
class BandProbe {
 public:
  BandProbe(const CMatrix& band_basis, const MeasurementScheme& scheme);

  Index d() const { return d_; }
  const MeasurementScheme& scheme() const { return scheme_; }
  /// D(rho_n, Omega) for each column.
  const RVector& per_eigenstate() const { return per_eigenstate_; }
  /// D(sum_n w_n rho_n, Omega); `weights` has one entry per band column.
  double mixture_distance(const RVector& weights) const;

  /// Measurement sets: Q(r, n) = tr(M_r rho_n) and q_r = tr(M_r Omega).
  const RMatrix& overlaps() const { return overlaps_; }
  const RVector& omega_probabilities() const { return omega_probs_; }

  /// Subsystems: reduced eigenstates and reduced Omega.
  const std::vector<CMatrix>& reduced() const { return reduced_; }
  const CMatrix& omega_reduced() const { return omega_reduced_; }

 private:
  MeasurementScheme scheme_;
  Index d_ = 0;
  RMatrix overlaps_;
  RVector omega_probs_;
  std::vector<CMatrix> reduced_;
  CMatrix omega_reduced_;
  RVector per_eigenstate_;
};

/// Mean / RMS / max distinguishability of band eigenstates from Omega.
struct EigenstateThermalStats {
  RVector per_eigenstate;
  double mean = 0.0;
  double rms = 0.0;
  double max = 0.0;
  Index argmax = 0;
  /// Best mean over intra-eigenspace basis choices (degenerate spectra only).
  std::optional<double> mean_max;
};

/// Builds the statistics from per-eigenstate values; throws std::logic_error
/// if the power-mean ordering mean <= rms <= max is violated.
EigenstateThermalStats summarize(const RVector& per_eigenstate);

EigenstateThermalStats eigenstate_stats(const EnergyBand& band, const SpectralSystem& sys,
                                        const MeasurementScheme& scheme);

struct DMeanMax {
  double value = 0.0;      // best mean found (a lower bound on the true maximum)
  double unrotated = 0.0;  // mean in the system's own eigenbasis
  CMatrix basis;           // band basis achieving `value`
  int restarts = 0;
};

/// Maximises the mean eigenstate distinguishability over unitary rotations
/// inside each degenerate block of the band. Random-restart coordinate
/// ascent over Givens rotations (angle and phase) on index pairs within a
/// block; restart 0 starts from the system basis, the others from Haar
/// rotations of each block. Returns the plain mean when every block is 1-dim.
DMeanMax dmean_max_heuristic(const EnergyBand& band, const SpectralSystem& sys,
                             const DegeneracyStructure& degeneracy,
                             const MeasurementScheme& scheme, int n_restarts,
                             std::uint64_t seed);

}  // namespace thermavg
