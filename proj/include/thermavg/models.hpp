#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermavg/qcore.hpp"
#include "thermavg/rng.hpp"
#include "thermavg/thermal.hpp"

namespace thermavg {

enum class ModelKind { random_gue, spin_chain, scarred, explicit_diagonal, degenerate_block };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Parameters for every Hamiltonian generator.
///
/// GUE normalisation: diagonal entries N(0, 1), off-diagonal real and
/// imaginary parts N(0, 1/2), so E|H_ij|^2 = 1 and the spectrum fills the
/// semicircle of radius 2 sqrt(dim).
///
/// Spin chain: H = J sum Z_i Z_{i+1} + h_x sum X_i + h_z sum Z_i on
/// `chain_length` qubits with open boundaries. Site 0 is the most significant
/// bit, so a half-chain subsystem is SubsystemPosition::first. The defaults
/// (J = 1, h_x = 0.9, h_z = 0.8) sit in the nonintegrable regime.
///
/// Scarred: a GUE matrix whose eigenvectors at `scar_count` indices drawn
/// from the central quarter of the spectrum are replaced by distinct
/// computational basis vectors; the remaining eigenvectors are projected off
/// the scars and Lowdin-orthonormalised.
///
/// Degenerate block: energies 0, 1, 2, ... repeated per entry of
/// `degeneracy_profile`, rotated by a Haar unitary drawn from `seed`.
struct ModelSpec {
  ModelKind kind = ModelKind::random_gue;
  int dim = 0;
  int chain_length = 0;
  double coupling = 1.0;
  double transverse = 0.9;
  double longitudinal = 0.8;
  std::vector<double> spectrum;
  int scar_count = 0;
  std::vector<int> degeneracy_profile;
  std::uint64_t seed = 0;
};

struct BuiltModel {
  SpectralSystem sys;
  /// Eigenstate indices replaced by scars (scarred kind only).
  std::vector<Index> scar_indices;
};

BuiltModel build_model(const ModelSpec& spec);
SpectralSystem build_hamiltonian(const ModelSpec& spec);

struct GapReport {
  bool is_nondegenerate = true;
  std::size_t gap_collision_count = 0;
};

/// Enumerates all gaps E_a - E_b (a > b), sorts them and counts neighbouring
/// pairs closer than `tol`. Level degeneracies count as collisions too.
GapReport nondegenerate_gaps_check(const SpectralSystem& sys, double tol);

/// d two-outcome POVMs {|n><n|, I - |n><n|}, one per band eigenstate.
MeasurementSet build_eigenbasis_measurements(const EnergyBand& band, const SpectralSystem& sys);

/// Random coarse POVMs: A_r = G_r G_r^dagger, M_r = S^{-1/2} A_r S^{-1/2}
/// with S = sum_r A_r. A numerically singular S triggers a redraw with the
/// next seed; the label records how many redraws happened.
MeasurementSet build_random_coarse_measurements(Index dim, int n_povms, int outcomes_per_povm,
                                                std::uint64_t seed);

// -----------------------------------------------------------------------------
// State generators

/// Haar-random pure state on the span of the band eigenvectors.
CVector random_band_state(const SpectralSystem& sys, const EnergyBand& band, Rng& rng);

/// Haar-random pure state on the full space.
CVector random_pure_state(Index dim, Rng& rng);

/// Random mixed state of the given rank (normalised Wishart).
DensityMatrix random_mixed_state(Index dim, Index rank, Rng& rng);

/// Pure state with a Gaussian energy profile centred on the band, random
/// phases, and exactly `tail_weight` of its population outside the band.
CVector profiled_state(const SpectralSystem& sys, const EnergyBand& band, double tail_weight,
                       Rng& rng);

}  // namespace thermavg
