#include "thermavg/bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "thermavg/adversarial.hpp"
#include "thermavg/kernels.hpp"
#include "thermavg/models.hpp"
#include "thermavg/rng.hpp"
#include "thermavg/tolerances.hpp"

namespace thermavg {

namespace {

constexpr std::array<std::pair<BoundName, const char*>, 10> kNames{{
    {BoundName::equilibration, "equilibration"},
    {BoundName::convexity_chain, "convexity_chain"},
    {BoundName::thm1_rms, "thm1_rms"},
    {BoundName::thm1_mean, "thm1_mean"},
    {BoundName::thm2_finite, "thm2_finite"},
    {BoundName::thm2_subsystem, "thm2_subsystem"},
    {BoundName::tails, "tails"},
    {BoundName::deff_sandwich, "deff_sandwich"},
    {BoundName::thm3_finite, "thm3_finite"},
    {BoundName::thm3_subsystem, "thm3_subsystem"},
}};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

std::string to_string(BoundName name) {
  for (const auto& [n, s] : kNames)
    if (n == name) return s;
  return "unknown";
}

BoundName bound_name_from_string(const std::string& name) {
  for (const auto& [n, s] : kNames)
    if (name == s) return n;
  throw ValidationError("unknown check name '" + name + "'");
}

bool is_theorem_class(BoundName name) { return name != BoundName::equilibration; }

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::passed: return "passed";
    case CheckStatus::failed: return "failed";
    case CheckStatus::inapplicable: return "inapplicable";
  }
  return "unknown";
}

BoundCheck make_check(BoundName name, double lhs, double rhs) {
  BoundCheck c;
  c.name = name;
  c.lhs = lhs;
  c.rhs = rhs;
  c.margin = rhs - lhs;
  c.status = lhs <= rhs + tolerances().bound_pass ? CheckStatus::passed : CheckStatus::failed;
  return c;
}

BoundCheck inapplicable_check(BoundName name, std::string reason) {
  BoundCheck c;
  c.name = name;
  c.lhs = c.rhs = c.margin = std::numeric_limits<double>::quiet_NaN();
  c.status = CheckStatus::inapplicable;
  c.details = std::move(reason);
  return c;
}

BandView band_view(const TimeAveragedState& omega, const EnergyBand& band,
                   const SpectralSystem& sys) {
  BandView v;
  const double total = omega.weights.sum();
  if (omega.basis.cols() == sys.dim()) {
    v.basis = omega.basis.middleCols(band.index_lo, band.d);
    v.weights = omega.weights.segment(band.index_lo, band.d);
  } else if (omega.basis.cols() == band.d) {
    v.basis = omega.basis;
    v.weights = omega.weights;
  } else {
    throw ValidationError("band_view: state basis matches neither the system nor the band");
  }
  const double inside = v.weights.sum();
  v.outside = std::max(0.0, total - inside);
  if (!(inside > tolerances().tails_zero))
    throw ValidationError("band_view: state has no weight inside the band");
  v.weights /= inside;
  v.weights = v.weights.cwiseMax(0.0);
  return v;
}

// -----------------------------------------------------------------------------

std::pair<BoundCheck, BoundCheck> check_thm1(const RVector& weights, const BandProbe& probe) {
  const auto d = static_cast<double>(probe.d());
  const EigenstateThermalStats st = summarize(probe.per_eigenstate());
  const double d_eff = 1.0 / weights.squaredNorm();
  const double factor = std::max(0.0, d / d_eff - 1.0);
  const double lhs = probe.mixture_distance(weights);
  const double rhs_rms = st.rms * std::sqrt(factor);
  const double rhs_mean = std::sqrt(st.mean * factor);

  BoundCheck rms = make_check(BoundName::thm1_rms, lhs, rhs_rms);
  BoundCheck mean = make_check(BoundName::thm1_mean, lhs, rhs_mean);
  const bool ordered = rhs_rms <= rhs_mean + tolerances().bound_pass;
  for (BoundCheck* c : {&rms, &mean}) {
    c->d = probe.d();
    c->d_eff = d_eff;
    c->power = measuring_power(probe.scheme());
    c->details = "D_mean=" + fmt(st.mean) + " D_rms=" + fmt(st.rms) +
                 " rms_form<=mean_form=" + (ordered ? "true" : "false");
  }
  if (!ordered) rms.status = CheckStatus::failed;
  return {rms, mean};
}

std::pair<BoundCheck, BoundCheck> check_thm1(const TimeAveragedState& omega,
                                             const EnergyBand& band, const SpectralSystem& sys,
                                             const MeasurementScheme& scheme) {
  const BandView v = band_view(omega, band, sys);
  if (v.outside > 1e-10)
    throw ValidationError("check_thm1: state has weight " + fmt(v.outside) + " outside the band");
  return check_thm1(v.weights, BandProbe(v.basis, scheme));
}

BoundCheck check_convexity_chain(const RVector& weights, const BandProbe& probe) {
  const RVector& per = probe.per_eigenstate();
  const double lhs = probe.mixture_distance(weights);
  const double avg = weights.dot(per);
  const double mx = per.maxCoeff();
  BoundCheck c = make_check(BoundName::convexity_chain, lhs, avg);
  const bool second = avg <= mx + tolerances().bound_pass;
  if (!second) c.status = CheckStatus::failed;
  c.d = probe.d();
  c.d_eff = 1.0 / weights.squaredNorm();
  c.power = measuring_power(probe.scheme());
  c.details = "sum_p_D=" + fmt(avg) + " max_D=" + fmt(mx) +
              " second_inequality=" + (second ? "true" : "false");
  return c;
}

// -----------------------------------------------------------------------------

namespace {

RVector sample_times(int n, double t_max, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, t_max);
  RVector t(n);
  for (int i = 0; i < n; ++i) t(i) = u(rng);
  return t;
}

/// Mean of D(rho(t), omega) over the sampled times.
double equilibration_mean(const CMatrix& rho0_energy, const std::optional<CVector>& coeffs,
                          const TimeAveragedState& omega, const SpectralSystem& sys,
                          const MeasurementScheme& scheme, const RVector& times) {
  const CMatrix& v = sys.eigenvectors();
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme)) {
    const MeasurementSet ms_e = kernels::to_basis(*ms, v);
    const CMatrix omega_e = v.adjoint() * omega.matrix.matrix() * v;
    return kernels::parallel::distinguishability_trace(ms_e, rho0_energy, omega_e, sys.energies(),
                                                       times)
        .mean();
  }
  const auto& part = std::get<SubsystemPartition>(scheme);
  const CMatrix omega_s = partial_trace(omega.matrix.matrix(), part);
  if (coeffs)
    return kernels::parallel::subsystem_distance_trace(v, *coeffs, sys.energies(), omega_s, part,
                                                       times)
        .mean();
  double sum = 0.0;
  for (Index i = 0; i < times.size(); ++i) {
    RVector ph = -sys.energies() * times(i);
    CVector phase(ph.size());
    for (Index n = 0; n < ph.size(); ++n) phase(n) = std::polar(1.0, ph(n));
    const CMatrix rho_e = phase.asDiagonal() * rho0_energy * phase.conjugate().asDiagonal();
    sum += trace_distance(partial_trace(CMatrix(v * rho_e * v.adjoint()), part), omega_s);
  }
  return sum / static_cast<double>(times.size());
}

BoundCheck equilibration_impl(const DensityMatrix& rho0, const std::optional<CVector>& coeffs,
                              const SpectralSystem& sys, const MeasurementScheme& scheme,
                              const EquilibrationOptions& opt) {
  if (opt.n_times < 1 || !(opt.t_max > 0.0))
    throw ValidationError("check_equilibration: need n_times >= 1 and t_max > 0");
  const GapReport gaps = nondegenerate_gaps_check(sys, opt.gap_tolerance);
  if (!gaps.is_nondegenerate)
    return inapplicable_check(BoundName::equilibration,
                              "degenerate energy gaps: " + std::to_string(gaps.gap_collision_count) +
                                  " collisions");
  const bool subsystem = is_subsystem(scheme);
  if (subsystem && opt.subsystem_form == SubsystemEquilibration::off)
    return inapplicable_check(BoundName::equilibration,
                              "all subsystem POVMs have unbounded outcome count");

  const TimeAveragedState omega = time_average(rho0, sys);
  const double d_eff = effective_dimension(omega);
  const std::size_t power = measuring_power(scheme);
  const double denom = subsystem && opt.subsystem_form == SubsystemEquilibration::source ? 2.0 : 4.0;
  const double rhs = static_cast<double>(power) / (denom * std::sqrt(d_eff));
  const CMatrix rho0_e = sys.eigenvectors().adjoint() * rho0.matrix() * sys.eigenvectors();

  RVector times = sample_times(opt.n_times, opt.t_max, opt.seed);
  double lhs = equilibration_mean(rho0_e, coeffs, omega, sys, scheme, times);
  std::string details = "samples=" + std::to_string(opt.n_times);
  if (lhs > rhs + tolerances().bound_pass && opt.rerun_factor > 1) {
    const int n = opt.n_times * opt.rerun_factor;
    times = sample_times(n, opt.t_max, derive_seed(opt.seed, 1));
    const double first = lhs;
    lhs = equilibration_mean(rho0_e, coeffs, omega, sys, scheme, times);
    details = "rerun samples=" + std::to_string(n) + " first_lhs=" + fmt(first);
  }
  BoundCheck c = make_check(BoundName::equilibration, lhs, rhs);
  c.statistical = true;
  c.d = sys.dim();
  c.d_eff = d_eff;
  c.power = power;
  c.seed = opt.seed;
  c.details = details + " t_max=" + fmt(opt.t_max);
  if (subsystem) c.details += " subsystem_form=" + to_string(opt.subsystem_form);
  return c;
}

}  // namespace

std::string to_string(SubsystemEquilibration form) {
  switch (form) {
    case SubsystemEquilibration::source: return "source";
    case SubsystemEquilibration::footnote: return "footnote";
    case SubsystemEquilibration::off: return "off";
  }
  return "?";
}

SubsystemEquilibration subsystem_equilibration_from_string(const std::string& s) {
  if (s == "source") return SubsystemEquilibration::source;
  if (s == "footnote") return SubsystemEquilibration::footnote;
  if (s == "off") return SubsystemEquilibration::off;
  throw ValidationError("unknown subsystem equilibration form '" + s +
                        "'; expected source, footnote or off");
}

BoundCheck check_equilibration(const CVector& psi0, const SpectralSystem& sys,
                               const MeasurementScheme& scheme, const EquilibrationOptions& opt) {
  if (psi0.size() != sys.dim()) throw ValidationError("check_equilibration: dimension mismatch");
  const CVector c = sys.eigenvectors().adjoint() * (psi0 / psi0.norm());
  return equilibration_impl(DensityMatrix::pure(psi0), c, sys, scheme, opt);
}

BoundCheck check_equilibration(const DensityMatrix& rho0, const SpectralSystem& sys,
                               const MeasurementScheme& scheme, const EquilibrationOptions& opt) {
  if (rho0.dim() != sys.dim()) throw ValidationError("check_equilibration: dimension mismatch");
  return equilibration_impl(rho0, std::nullopt, sys, scheme, opt);
}

// -----------------------------------------------------------------------------

namespace {

double power_factor(const MeasurementScheme& scheme) {
  const auto p = static_cast<double>(measuring_power(scheme));
  return is_subsystem(scheme) ? std::pow(p, 2.5) : p;
}

struct WitnessSummary {
  double epsilon = 0.0;
  std::size_t best = 0;
  /// Only the witness the proof selects carries the guarantee; the others
  /// just raise eps*.
  bool proof_satisfied = true;
  std::size_t n_satisfied = 0;
  double min_deff = std::numeric_limits<double>::infinity();
};

WitnessSummary summarise_witnesses(const std::vector<WitnessReport>& ws, const CMatrix& basis,
                                   const MeasurementScheme& scheme, Index k) {
  WitnessSummary s;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (ws[i].lhs > s.epsilon) {
      s.epsilon = ws[i].lhs;
      s.best = i;
    }
    if (ws[i].satisfied) ++s.n_satisfied;
    s.min_deff = std::min(s.min_deff, ws[i].achieved_deff);
  }
  if (!ws.empty()) {
    const WitnessReport proof = witness_state(basis, scheme, k);
    s.proof_satisfied = proof.satisfied;
    s.epsilon = std::max(s.epsilon, proof.lhs);
  }
  return s;
}

std::string witness_details(const std::vector<WitnessReport>& ws, const WitnessSummary& s) {
  return "witnesses=" + std::to_string(ws.size()) +
         " proof_witness_satisfied=" + (s.proof_satisfied ? "true" : "false") +
         " witnesses_above_rhs=" + std::to_string(s.n_satisfied);
}

}  // namespace

BoundCheck check_thm2(const CMatrix& basis, const MeasurementScheme& scheme, Index k) {
  const Index d = basis.cols();
  if (k == 0) k = default_witness_k(d);
  validate_witness_k(d, k);
  const BoundName name = is_subsystem(scheme) ? BoundName::thm2_subsystem : BoundName::thm2_finite;
  const double d_mean = BandProbe(basis, scheme).per_eigenstate().mean();
  const auto ws = all_witnesses(basis, scheme, k);
  const WitnessSummary s = summarise_witnesses(ws, basis, scheme, k);

  BoundCheck c = make_check(name, d_mean, power_factor(scheme) * s.epsilon);
  if (!s.proof_satisfied) c.status = CheckStatus::failed;
  c.d = d;
  c.k = k;
  c.d_eff = ws.empty() ? static_cast<double>(k) : s.min_deff;
  c.power = measuring_power(scheme);
  c.epsilon = s.epsilon;
  c.details = witness_details(ws, s);
  if (!ws.empty()) c.details += " best_selector=" + std::to_string(ws[s.best].selector);
  return c;
}

BoundCheck check_thm2(const EnergyBand& band, const SpectralSystem& sys,
                      const MeasurementScheme& scheme, Index k) {
  return check_thm2(band_basis(sys, band), scheme, k);
}

BoundCheck check_tails(const DensityMatrix& rho0, const EnergyBand& band,
                       const SpectralSystem& sys, const MeasurementScheme& scheme) {
  const TimeAveragedState omega = time_average(rho0, sys);
  const TailsDecomposition td = tails_decompose(omega, band);
  const BandView v = band_view(omega, band, sys);
  const BandProbe probe(v.basis, scheme);
  const double d_mean = probe.per_eigenstate().mean();
  const double d_eff = 1.0 / v.weights.squaredNorm();
  const double rhs =
      td.delta + std::sqrt(d_mean * std::max(0.0, static_cast<double>(band.d) / d_eff - 1.0));
  const DensityMatrix omega_mc = microcanonical(band);
  const double lhs = distinguishability(omega.matrix, omega_mc, scheme);

  BoundCheck c = make_check(BoundName::tails, lhs, rhs);
  c.d = band.d;
  c.d_eff = d_eff;
  c.power = measuring_power(scheme);
  c.details = "delta=" + fmt(td.delta) + " D_mean=" + fmt(d_mean);
  return c;
}

BoundCheck check_deff_sandwich(const TimeAveragedState& omega, const DegeneracyStructure& deg) {
  const DeffSandwich s = deff_sandwich(omega, deg);
  const double d_eff = effective_dimension(omega, deg);
  BoundCheck c = make_check(BoundName::deff_sandwich,
                            std::max(s.lower - d_eff, d_eff - s.upper), 0.0);
  c.d = omega.matrix.dim();
  c.d_eff = d_eff;
  c.details = "lower=" + fmt(s.lower) + " upper=" + fmt(s.upper) + " g=" + std::to_string(deg.g);
  return c;
}

BoundCheck check_thm3(const EnergyBand& band, const SpectralSystem& sys,
                      const MeasurementScheme& scheme, const Thm3Options& opt) {
  const BoundName name = is_subsystem(scheme) ? BoundName::thm3_subsystem : BoundName::thm3_finite;
  const DegeneracyStructure deg = band_degeneracy(sys, band);
  const Index d = band.d;
  const auto g = static_cast<Index>(deg.g);
  if (4 * g > d)
    return inapplicable_check(name, "g = " + std::to_string(g) + " > d/4 with d = " +
                                        std::to_string(d) + ": no state has d_eff >= d/4");
  const Index k = opt.k == 0 ? default_witness_k(d) : opt.k;
  validate_witness_k(d, k);

  const DMeanMax dm = dmean_max_heuristic(band, sys, deg, scheme, opt.n_restarts, opt.seed);
  const auto ws = all_witnesses(dm.basis, scheme, k);
  const WitnessSummary s = summarise_witnesses(ws, dm.basis, scheme, k);

  // Degenerate-form d_eff of each witness must clear d / (4g).
  DegeneracyStructure local;
  local.eigenvectors = dm.basis;
  local.g = deg.g;
  for (const auto& b : deg.blocks) {
    std::vector<Index> shifted;
    for (Index i : b) shifted.push_back(i - band.index_lo);
    local.blocks.push_back(std::move(shifted));
  }
  double min_deff = std::numeric_limits<double>::infinity();
  for (const auto& w : ws) min_deff = std::min(min_deff, effective_dimension(w.omega, local));
  const bool deff_ok = ws.empty() || 4.0 * static_cast<double>(g) * min_deff >=
                                         static_cast<double>(d) - tolerances().bound_pass;

  BoundCheck c = make_check(name, dm.value, power_factor(scheme) * s.epsilon);
  if (!s.proof_satisfied || !deff_ok) c.status = CheckStatus::failed;
  c.d = d;
  c.k = k;
  c.d_eff = ws.empty() ? std::numeric_limits<double>::quiet_NaN() : min_deff;
  c.power = measuring_power(scheme);
  c.epsilon = s.epsilon;
  c.seed = opt.seed;
  c.details = "g=" + std::to_string(g) + " D_mean_unrotated=" + fmt(dm.unrotated) +
              " restarts=" + std::to_string(dm.restarts) +
              " " + witness_details(ws, s) +
              " deff_ge_d_over_4g=" + (deff_ok ? "true" : "false") +
              " note=heuristic lower bound on D_mean_max; consistency check, not full verification";
  return c;
}

}  // namespace thermavg
