#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "thermavg/distinguish.hpp"
#include "thermavg/qcore.hpp"
#include "thermavg/thermal.hpp"

namespace thermavg {

enum class BoundName {
  equilibration,
  convexity_chain,
  thm1_rms,
  thm1_mean,
  thm2_finite,
  thm2_subsystem,
  tails,
  deff_sandwich,
  thm3_finite,
  thm3_subsystem,
};

std::string to_string(BoundName name);
BoundName bound_name_from_string(const std::string& name);
/// Everything except equilibration: a failure of these is a code defect.
bool is_theorem_class(BoundName name);

enum class CheckStatus { passed, failed, inapplicable };
std::string to_string(CheckStatus status);

struct BoundCheck {
  BoundName name = BoundName::thm1_mean;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  CheckStatus status = CheckStatus::inapplicable;
  /// Finite-sample surrogate (equilibration).
  bool statistical = false;

  // Instance identifiers.
  std::uint64_t seed = 0;
  Index d = 0;
  double d_eff = std::numeric_limits<double>::quiet_NaN();
  Index k = 0;
  /// N_M for measurement sets, d_S for subsystems.
  std::size_t power = 0;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  std::string details;

  bool passed() const { return status == CheckStatus::passed; }
};

/// Sets margin and status (passed iff lhs <= rhs + tolerance).
BoundCheck make_check(BoundName name, double lhs, double rhs);
BoundCheck inapplicable_check(BoundName name, std::string reason);

/// Band part of a time-averaged state: the band columns of its eigenbasis
/// and the matching weights, renormalised. `outside` is the weight that was
/// dropped.
struct BandView {
  CMatrix basis;
  RVector weights;
  double outside = 0.0;
};
BandView band_view(const TimeAveragedState& omega, const EnergyBand& band,
                   const SpectralSystem& sys);

/// Both forms of the time-averaged-state bound. `weights` describe
/// omega = sum_n w_n |b_n><b_n| over the probe's basis. In a degenerate band
/// the probe must be built on omega's own eigenbasis; the statistics are then
/// those of that energy basis and d_eff = 1 / sum w^2, which is the tighter
/// choice allowed by the degenerate-spectrum argument.
std::pair<BoundCheck, BoundCheck> check_thm1(const RVector& weights, const BandProbe& probe);
/// Requires omega to live inside the band.
std::pair<BoundCheck, BoundCheck> check_thm1(const TimeAveragedState& omega,
                                             const EnergyBand& band, const SpectralSystem& sys,
                                             const MeasurementScheme& scheme);

/// D(omega, Omega) <= sum_n w_n D(rho_n, Omega) <= max_n D(rho_n, Omega).
/// lhs/rhs report the first inequality; the second is verified too.
BoundCheck check_convexity_chain(const RVector& weights, const BandProbe& probe);

/// Right-hand side used for subsystem measurements, which have no finite
/// outcome count. `source`: d_S / (2 sqrt(d_eff)), the subsystem equilibration
/// theorem as originally proved. `footnote`: d_S / (4 sqrt(d_eff)), i.e. d_S
/// put in place of N_M. `off`: the check is inapplicable.
enum class SubsystemEquilibration { source, footnote, off };
std::string to_string(SubsystemEquilibration form);
SubsystemEquilibration subsystem_equilibration_from_string(const std::string& s);

struct EquilibrationOptions {
  int n_times = 200;
  double t_max = 1.0;
  std::uint64_t seed = 0;
  SubsystemEquilibration subsystem_form = SubsystemEquilibration::source;
  /// Re-run with this many times more samples before reporting a failure.
  int rerun_factor = 10;
  double gap_tolerance = 1e-9;
};

/// Time average of D(rho(t), omega) over uniformly sampled times against
/// N_M / (4 sqrt(d_eff)). Inapplicable when the spectrum has degenerate gaps.
BoundCheck check_equilibration(const CVector& psi0, const SpectralSystem& sys,
                               const MeasurementScheme& scheme, const EquilibrationOptions& opt);
BoundCheck check_equilibration(const DensityMatrix& rho0, const SpectralSystem& sys,
                               const MeasurementScheme& scheme, const EquilibrationOptions& opt);

/// D_mean <= N_M eps* (or d_S^{5/2} eps*), eps* the largest D(omega, Omega)
/// over the proof's witnesses in `basis`. k = 0 selects ceil(d/4).
BoundCheck check_thm2(const CMatrix& basis, const MeasurementScheme& scheme, Index k = 0);
BoundCheck check_thm2(const EnergyBand& band, const SpectralSystem& sys,
                      const MeasurementScheme& scheme, Index k = 0);

/// D(omega, Omega) <= delta + sqrt(D_mean (d / d_eff(omega_band) - 1)) for a
/// state with out-of-band weight delta.
BoundCheck check_tails(const DensityMatrix& rho0, const EnergyBand& band,
                       const SpectralSystem& sys, const MeasurementScheme& scheme);

/// 1/(g sum p^2) <= d_eff <= 1/sum p^2 for the projector-weight d_eff.
/// lhs = max(lower - d_eff, d_eff - upper), rhs = 0.
BoundCheck check_deff_sandwich(const TimeAveragedState& omega, const DegeneracyStructure& deg);

struct Thm3Options {
  int n_restarts = 4;
  std::uint64_t seed = 0;
  Index k = 0;
};

/// Heuristic D_mean,max <= N_M eps* (or d_S^{5/2} eps*) with witnesses built
/// in the basis that achieved it. Inapplicable when 4g > d.
BoundCheck check_thm3(const EnergyBand& band, const SpectralSystem& sys,
                      const MeasurementScheme& scheme, const Thm3Options& opt = {});

}  // namespace thermavg
