#include "thermavg/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "thermavg/models.hpp"
#include "thermavg/rng.hpp"
#include "thermavg/tolerances.hpp"

namespace thermavg {

void SubsetSelectionProblem::validate() const {
  const Index d = values.size();
  if (d == 0) throw ValidationError("select_subset: no values");
  if (k < 1) throw ValidationError("select_subset: k must be positive");
  if (3 * k > d) {
    std::ostringstream os;
    os << "select_subset: k = " << k << " exceeds d/3 for d = " << d;
    throw ValidationError(os.str());
  }
  const double scale = std::max(1.0, values.cwiseAbs().sum());
  if (std::abs(values.sum()) > 1e-10 * scale) {
    std::ostringstream os;
    os << "select_subset: values sum to " << values.sum() << ", expected 0";
    throw ValidationError(os.str());
  }
}

SubsetSelection select_subset(const SubsetSelectionProblem& prob) {
  prob.validate();
  const Index d = prob.values.size();
  SubsetSelection out;

  RVector a = prob.values;
  const auto positives = static_cast<Index>((a.array() > 0.0).count());
  if (2 * positives > d) {
    a = -a;
    out.flipped = true;
  }
  const auto n_pos = static_cast<Index>((a.array() > 0.0).count());
  out.proof_case = prob.k <= n_pos ? 1 : 2;

  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x) > a(y); });
  // Case 1 keeps the k largest positives; case 2 keeps every positive and
  // tops up with the least negative values. Both are the first k in order.
  out.indices.assign(order.begin(), order.begin() + prob.k);
  return out;
}

Index default_witness_k(Index d) {
  const Index k = (d + 3) / 4;
  validate_witness_k(d, k);
  return k;
}

void validate_witness_k(Index d, Index k) {
  if (d < 4) {
    std::ostringstream os;
    os << "witness: band dimension " << d << " < 4 admits no k with d/4 <= k <= d/3";
    throw ValidationError(os.str());
  }
  if (4 * k < d || 3 * k > d) {
    std::ostringstream os;
    os << "witness: k = " << k << " outside [d/4, d/3] for d = " << d;
    if ((d + 3) / 4 > d / 3) os << " (no integer k exists for this d)";
    throw ValidationError(os.str());
  }
}

namespace {

CMatrix uniform_mixture(const CMatrix& basis) {
  return basis * basis.adjoint() / static_cast<double>(basis.cols());
}

WitnessReport build_report(const CMatrix& basis, const RVector& a, Index k) {
  const Index d = basis.cols();
  const SubsetSelection sel = select_subset({a, k});
  RVector w = RVector::Zero(d);
  for (Index n : sel.indices) w(n) = 1.0 / static_cast<double>(k);
  WitnessReport r{mixture(basis, w), k, 0.0, 0.0, 0.0, false, sel.indices, 0, 0, sel.proof_case};
  r.achieved_deff = effective_dimension(r.omega);
  return r;
}

struct FiniteSelector {
  std::size_t povm = 0;
  std::size_t outcome = 0;
};

/// Best outcome of POVM m: argmax_r sum_n |Q(r, n) - q_r|.
std::size_t best_outcome(const MeasurementSet& ms, std::size_t m, const RMatrix& centred) {
  const std::size_t off = ms.outcome_offset(m);
  std::size_t best = 0;
  double best_v = -1.0;
  for (std::size_t r = 0; r < ms.povms()[m].n_outcomes(); ++r) {
    const double v = centred.row(static_cast<Index>(off + r)).cwiseAbs().sum();
    if (v > best_v) {
      best_v = v;
      best = r;
    }
  }
  return best;
}

RMatrix centred_overlaps(const BandProbe& probe) {
  return probe.overlaps().colwise() - probe.omega_probabilities();
}

WitnessReport finite_for(const CMatrix& basis, const MeasurementSet& ms, const BandProbe& probe,
                         const RMatrix& centred, FiniteSelector sel, Index k) {
  const auto row = static_cast<Index>(ms.outcome_offset(sel.povm) + sel.outcome);
  WitnessReport r = build_report(basis, centred.row(row).transpose(), k);
  r.selector = sel.povm;
  r.outcome = sel.outcome;
  const DensityMatrix omega_mc = DensityMatrix::trusted(uniform_mixture(basis));
  r.lhs = dist_set(r.omega.matrix, omega_mc, ms).value;
  r.rhs = probe.per_eigenstate().mean() / static_cast<double>(ms.total_outcomes());
  r.satisfied = r.lhs >= r.rhs - tolerances().bound_pass;
  return r;
}

RMatrix basis_projections(const BandProbe& probe, const std::vector<HermitianOperator>& ops) {
  const auto& red = probe.reduced();
  RMatrix a(static_cast<Index>(ops.size()), probe.d());
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (Index n = 0; n < probe.d(); ++n)
      a(static_cast<Index>(i), n) =
          trace_product(red[static_cast<std::size_t>(n)] - probe.omega_reduced(), ops[i].matrix());
  // Exact zero-sum: subtract the rounding residue of the mean.
  for (Index i = 0; i < a.rows(); ++i) a.row(i).array() -= a.row(i).mean();
  return a;
}

WitnessReport subsystem_for(const CMatrix& basis, const SubsystemPartition& part,
                            const BandProbe& probe, const RMatrix& proj, std::size_t element,
                            Index k) {
  WitnessReport r = build_report(basis, proj.row(static_cast<Index>(element)).transpose(), k);
  r.selector = element;
  r.lhs = trace_distance(partial_trace(r.omega.matrix.matrix(), part), probe.omega_reduced());
  r.rhs = std::pow(static_cast<double>(part.dim_s), -2.5) * probe.per_eigenstate().mean();
  r.satisfied = r.lhs >= r.rhs - tolerances().bound_pass;
  return r;
}

}  // namespace

WitnessReport witness_state_finite(const CMatrix& basis, const MeasurementSet& ms, Index k) {
  validate_witness_k(basis.cols(), k);
  const BandProbe probe(basis, ms);
  const RMatrix centred = centred_overlaps(probe);

  // POVM maximising (1/N(M)) mean_n D_M(rho_n, Omega).
  std::size_t best_m = 0;
  double best_v = -1.0;
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const auto off = static_cast<Index>(ms.outcome_offset(m));
    const auto nm = static_cast<Index>(ms.povms()[m].n_outcomes());
    const double mean_dm = 0.5 * centred.middleRows(off, nm).cwiseAbs().colwise().sum().mean();
    const double v = mean_dm / static_cast<double>(nm);
    if (v > best_v) {
      best_v = v;
      best_m = m;
    }
  }
  return finite_for(basis, ms, probe, centred, {best_m, best_outcome(ms, best_m, centred)}, k);
}

WitnessReport witness_state_finite(const EnergyBand& band, const SpectralSystem& sys,
                                   const MeasurementSet& ms, Index k) {
  return witness_state_finite(band_basis(sys, band), ms, k);
}

WitnessReport witness_state_subsystem(const CMatrix& basis, const SubsystemPartition& part,
                                      Index k) {
  validate_witness_k(basis.cols(), k);
  part.validate(basis.rows());
  const BandProbe probe(basis, part);
  const auto ops = hermitian_operator_basis(part.dim_s);
  const RMatrix proj = basis_projections(probe, ops);
  Index best = 0;
  proj.cwiseAbs().rowwise().sum().maxCoeff(&best);
  return subsystem_for(basis, part, probe, proj, static_cast<std::size_t>(best), k);
}

WitnessReport witness_state_subsystem(const EnergyBand& band, const SpectralSystem& sys,
                                      const SubsystemPartition& part, Index k) {
  return witness_state_subsystem(band_basis(sys, band), part, k);
}

WitnessReport witness_state(const CMatrix& basis, const MeasurementScheme& scheme, Index k) {
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme)) return witness_state_finite(basis, *ms, k);
  return witness_state_subsystem(basis, std::get<SubsystemPartition>(scheme), k);
}

std::vector<WitnessReport> all_witnesses(const CMatrix& basis, const MeasurementScheme& scheme,
                                         Index k) {
  validate_witness_k(basis.cols(), k);
  std::vector<WitnessReport> out;
  const BandProbe probe(basis, scheme);
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme)) {
    const RMatrix centred = centred_overlaps(probe);
    for (std::size_t m = 0; m < ms->size(); ++m) {
      const std::size_t r = best_outcome(*ms, m, centred);
      if (centred.row(static_cast<Index>(ms->outcome_offset(m) + r)).cwiseAbs().sum() == 0.0)
        continue;
      out.push_back(finite_for(basis, *ms, probe, centred, {m, r}, k));
    }
    return out;
  }
  const auto& part = std::get<SubsystemPartition>(scheme);
  const auto ops = hermitian_operator_basis(part.dim_s);
  const RMatrix proj = basis_projections(probe, ops);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (proj.row(static_cast<Index>(i)).cwiseAbs().sum() == 0.0) continue;
    out.push_back(subsystem_for(basis, part, probe, proj, i, k));
  }
  return out;
}

// -----------------------------------------------------------------------------

bool CounterexampleReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

CounterexampleReport counterexample_suite(Index d, std::uint64_t seed, int n_states,
                                          int n_times) {
  if (d < 2) throw ValidationError("counterexample_suite: d must be at least 2");
  ModelSpec spec;
  spec.kind = ModelKind::explicit_diagonal;
  spec.dim = static_cast<int>(d);
  const SpectralSystem sys = build_hamiltonian(spec);
  const EnergyBand band = select_band_by_index(sys, 0, d - 1);
  const MeasurementSet ms = build_eigenbasis_measurements(band, sys);
  const DensityMatrix omega_mc = microcanonical(band);

  CounterexampleReport rep;
  rep.d = d;
  rep.per_eigenstate.resize(d);
  for (Index n = 0; n < d; ++n)
    rep.per_eigenstate(n) = dist_set(sys.eigenstate(n), omega_mc, ms).value;
  rep.mean = rep.per_eigenstate.mean();

  const double target = 1.0 - 1.0 / static_cast<double>(d);
  {
    const double err = (rep.per_eigenstate.array() - target).abs().maxCoeff();
    std::ostringstream os;
    os << "max |D(rho_n, Omega) - (1 - 1/d)| = " << err;
    rep.checks.push_back({"eigenstate_value", err, 1e-12, err <= 1e-12, os.str()});
  }

  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
  double worst_formula = 0.0, worst_margin = -1.0;
  for (int s = 0; s < n_states; ++s) {
    const CVector psi = random_band_state(sys, band, rng);
    const TimeAveragedState omega = time_average(DensityMatrix::pure(psi), sys);
    const double dist = dist_set(omega.matrix, omega_mc, ms).value;
    RVector p(d);
    for (Index m = 0; m < d; ++m) p(m) = std::norm(sys.eigenvector(m).dot(psi));
    const double closed = (p.array() - 1.0 / static_cast<double>(d)).abs().maxCoeff();
    const double bound = 1.0 / std::sqrt(effective_dimension(omega));
    worst_formula = std::max(worst_formula, std::abs(dist - closed));
    worst_margin = s == 0 ? bound - dist : std::min(worst_margin, bound - dist);
  }
  {
    std::ostringstream os;
    os << n_states << " random states; max |D - max_m|p_m - 1/d||";
    rep.checks.push_back({"closed_form", worst_formula, 1e-12, worst_formula <= 1e-12, os.str()});
  }
  {
    std::ostringstream os;
    os << n_states << " random states; min (1/sqrt(d_eff) - D)";
    rep.checks.push_back(
        {"deff_bound", -worst_margin, 0.0, worst_margin >= -tolerances().bound_pass, os.str()});
  }

  double drift = 0.0;
  const CVector psi0 = random_band_state(sys, band, rng);
  RVector p0(static_cast<Index>(ms.total_outcomes()));
  {
    Index r = 0;
    for (const auto& povm : ms.povms())
      for (const auto& o : povm.outcomes()) p0(r++) = o.expectation(psi0);
  }
  std::uniform_real_distribution<double> when(0.0, 1e3);
  for (int t = 0; t < n_times; ++t) {
    const CVector psi_t = evolve(psi0, sys, when(rng));
    Index r = 0;
    for (const auto& povm : ms.povms())
      for (const auto& o : povm.outcomes()) drift = std::max(drift, std::abs(o.expectation(psi_t) - p0(r++)));
  }
  {
    std::ostringstream os;
    os << n_times << " random times; max outcome-probability drift";
    rep.checks.push_back({"time_invariance", drift, 1e-10, drift <= 1e-10, os.str()});
  }
  return rep;
}

}  // namespace thermavg
