#pragma once

#include <optional>
#include <vector>

#include "thermavg/qcore.hpp"

namespace thermavg {

/// Contiguous run of eigenstates [index_lo, index_hi] of a SpectralSystem.
struct EnergyBand {
  Index index_lo = 0;
  Index index_hi = 0;
  Index d = 0;
  double e_min = 0.0;
  double e_max = 0.0;
  Index system_dim = 0;
  /// Projector onto the span of the band's eigenvectors.
  CMatrix projector;

  bool contains(Index n) const { return n >= index_lo && n <= index_hi; }
};

/// Maximal index range with energies in [e_min, e_min + width] (edges included).
EnergyBand select_band(const SpectralSystem& sys, double e_min, double width);
/// Explicit inclusive index range. Refuses ranges that split a degeneracy class.
EnergyBand select_band_by_index(const SpectralSystem& sys, Index lo, Index hi);
/// Window given as fractions of the spectral range, e.g. (0.25, 0.75).
EnergyBand select_band_by_fraction(const SpectralSystem& sys, double lo_frac, double hi_frac);

/// Band eigenvectors as columns (system_dim x d).
CMatrix band_basis(const SpectralSystem& sys, const EnergyBand& band);

/// Omega = projector / d.
DensityMatrix microcanonical(const EnergyBand& band);

/// omega = sum_n p_n |b_n><b_n|.
///
/// `basis` is an energy eigenbasis that diagonalises omega. Column n always
/// belongs to the same degeneracy class as the system's eigenvector n, so
/// band membership can be read off by index. For nondegenerate spectra it is
/// the system eigenbasis itself.
struct TimeAveragedState {
  RVector weights;
  CMatrix basis;
  DensityMatrix matrix;
};

/// Infinite-time average (hbar = 1): dephasing in the energy eigenbasis, or
/// block dephasing sum_m P_m rho0 P_m over degenerate eigenspaces.
TimeAveragedState time_average(const DensityMatrix& rho0, const SpectralSystem& sys);

/// Diagonal state sum_n p_n |b_n><b_n| for explicit weights over the columns
/// of `basis`. Weights must form a probability vector.
TimeAveragedState mixture(const CMatrix& basis, const RVector& weights);

/// Eigenspace projectors Pi_m, kept implicitly as index blocks over the
/// system eigenvectors.
struct DegeneracyStructure {
  std::vector<std::vector<Index>> blocks;
  CMatrix eigenvectors;
  std::size_t g = 1;

  CMatrix projector(std::size_t m) const;
  /// tr(Pi_m x).
  double weight(std::size_t m, const CMatrix& x) const;
};

DegeneracyStructure degeneracy_structure(const SpectralSystem& sys);
/// Same, restricted to the blocks inside `band`.
DegeneracyStructure band_degeneracy(const SpectralSystem& sys, const EnergyBand& band);

/// 1 / sum_n p_n^2.
double effective_dimension(const TimeAveragedState& omega);
/// 1 / sum_m tr(Pi_m omega)^2.
double effective_dimension(const TimeAveragedState& omega, const DegeneracyStructure& deg);

struct DeffSandwich {
  double lower = 0.0;  // 1 / (g sum p^2)
  double upper = 0.0;  // 1 / sum p^2
};
DeffSandwich deff_sandwich(const TimeAveragedState& omega, const DegeneracyStructure& deg);

/// exp(-iHt) rho0 exp(iHt) via eigenbasis phases.
DensityMatrix evolve(const DensityMatrix& rho0, const SpectralSystem& sys, double t);
CVector evolve(const CVector& psi0, const SpectralSystem& sys, double t);

/// omega = delta omega_comp + (1 - delta) omega_band.
struct TailsDecomposition {
  double delta = 0.0;
  TimeAveragedState omega_band;
  std::optional<DensityMatrix> omega_comp;
};
TailsDecomposition tails_decompose(const TimeAveragedState& omega_full, const EnergyBand& band);

/// Smallest energy gap above the degeneracy tolerance (0 for dim 1).
double min_nonzero_gap(const SpectralSystem& sys);

}  // namespace thermavg
