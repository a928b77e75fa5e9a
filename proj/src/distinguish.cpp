#include "thermavg/distinguish.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "thermavg/kernels.hpp"
#include "thermavg/rng.hpp"

namespace thermavg {

std::size_t measuring_power(const MeasurementScheme& scheme) {
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme)) return ms->total_outcomes();
  return static_cast<std::size_t>(std::get<SubsystemPartition>(scheme).dim_s);
}

bool is_subsystem(const MeasurementScheme& scheme) {
  return std::holds_alternative<SubsystemPartition>(scheme);
}

double dist_single(const DensityMatrix& rho, const DensityMatrix& sigma, const Povm& m) {
  if (rho.dim() != sigma.dim() || rho.dim() != m.dim())
    throw ValidationError("dist_single: dimension mismatch");
  const CMatrix diff = rho.matrix() - sigma.matrix();
  double sum = 0.0;
  for (const auto& o : m.outcomes()) sum += std::abs(o.expectation(diff));
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

SetDistinguishability dist_set(const DensityMatrix& rho, const DensityMatrix& sigma,
                               const MeasurementSet& ms) {
  if (ms.size() == 0) throw ValidationError("dist_set: empty measurement set");
  SetDistinguishability best;
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const double v = dist_single(rho, sigma, ms.povms()[m]);
    if (m == 0 || v > best.value) best = {v, m};
  }
  return best;
}

double subsystem_distance(const DensityMatrix& rho, const DensityMatrix& sigma,
                          const SubsystemPartition& part) {
  if (rho.dim() != sigma.dim()) throw ValidationError("subsystem_distance: dimension mismatch");
  return trace_distance(partial_trace(rho.matrix(), part), partial_trace(sigma.matrix(), part));
}

double distinguishability(const DensityMatrix& rho, const DensityMatrix& sigma,
                          const MeasurementScheme& scheme) {
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme)) return dist_set(rho, sigma, *ms).value;
  return subsystem_distance(rho, sigma, std::get<SubsystemPartition>(scheme));
}

// -----------------------------------------------------------------------------

BandProbe::BandProbe(const CMatrix& band_basis, const MeasurementScheme& scheme)
    : scheme_(scheme), d_(band_basis.cols()) {
  if (d_ < 1) throw ValidationError("BandProbe: empty band");
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme_)) {
    if (ms->size() == 0) throw ValidationError("BandProbe: empty measurement set");
    if (ms->dim() != band_basis.rows()) throw ValidationError("BandProbe: dimension mismatch");
    overlaps_ = kernels::parallel::outcome_overlaps(*ms, band_basis);
    omega_probs_ = overlaps_.rowwise().mean();
    per_eigenstate_.resize(d_);
    for (Index n = 0; n < d_; ++n)
      per_eigenstate_(n) = kernels::povm_max(*ms, overlaps_.col(n), omega_probs_).value;
  } else {
    const auto& part = std::get<SubsystemPartition>(scheme_);
    part.validate(band_basis.rows());
    reduced_ = kernels::parallel::reduced_states(band_basis, part);
    omega_reduced_ = CMatrix::Zero(part.dim_s, part.dim_s);
    for (const auto& r : reduced_) omega_reduced_ += r;
    omega_reduced_ /= static_cast<double>(d_);
    per_eigenstate_ = kernels::parallel::trace_distances_to(reduced_, omega_reduced_);
  }
}

double BandProbe::mixture_distance(const RVector& weights) const {
  if (weights.size() != d_) throw ValidationError("BandProbe: weight count mismatch");
  if (const auto* ms = std::get_if<MeasurementSet>(&scheme_))
    return kernels::povm_max(*ms, overlaps_ * weights, omega_probs_).value;
  CMatrix w = CMatrix::Zero(omega_reduced_.rows(), omega_reduced_.cols());
  for (Index n = 0; n < d_; ++n)
    if (weights(n) != 0.0) w += weights(n) * reduced_[static_cast<std::size_t>(n)];
  return trace_distance(w, omega_reduced_);
}

// -----------------------------------------------------------------------------

EigenstateThermalStats summarize(const RVector& per_eigenstate) {
  EigenstateThermalStats s;
  s.per_eigenstate = per_eigenstate;
  const Index d = per_eigenstate.size();
  if (d == 0) throw ValidationError("summarize: no eigenstates");
  s.mean = per_eigenstate.mean();
  s.rms = std::sqrt(per_eigenstate.squaredNorm() / static_cast<double>(d));
  s.max = per_eigenstate(0);
  s.argmax = 0;
  for (Index n = 1; n < d; ++n)
    if (per_eigenstate(n) > s.max) {
      s.max = per_eigenstate(n);
      s.argmax = n;
    }
  constexpr double slack = 1e-12;
  if (!(s.mean >= -slack && s.mean <= s.rms + slack && s.rms <= s.max + slack && s.max <= 1.0 + slack))
    throw std::logic_error("eigenstate statistics violate 0 <= mean <= rms <= max <= 1");
  return s;
}

EigenstateThermalStats eigenstate_stats(const EnergyBand& band, const SpectralSystem& sys,
                                        const MeasurementScheme& scheme) {
  const BandProbe probe(band_basis(sys, band), scheme);
  return summarize(probe.per_eigenstate());
}

// -----------------------------------------------------------------------------
// Givens-rotation ascent for the basis-maximised mean.

namespace {

class PairObjective {
 public:
  PairObjective(const MeasurementScheme& scheme, const RVector& omega_probs,
                const CMatrix& omega_s, const CVector& bi, const CVector& bj)
      : scheme_(scheme), omega_probs_(omega_probs), omega_s_(omega_s) {
    if (const auto* ms = std::get_if<MeasurementSet>(&scheme_)) {
      const auto n = static_cast<Index>(ms->total_outcomes());
      aii_.resize(n);
      ajj_.resize(n);
      aij_.resize(n);
      Index r = 0;
      for (const auto& p : ms->povms())
        for (const auto& o : p.outcomes()) {
          aii_(r) = o.expectation(bi);
          ajj_(r) = o.expectation(bj);
          aij_(r) = o.element(bi, bj);
          ++r;
        }
    } else {
      const auto& part = std::get<SubsystemPartition>(scheme_);
      rii_ = reduced_pure(bi, part);
      rjj_ = reduced_pure(bj, part);
      x_ = reduced_cross(bi, bj, part);
    }
  }

  /// D(u) + D(w) for u = c b_i + e^{i phi} s b_j, w = -e^{-i phi} s b_i + c b_j.
  double operator()(double theta, double phi) const {
    const double c = std::cos(theta), s = std::sin(theta);
    const cplx e = std::polar(1.0, phi);
    if (const auto* ms = std::get_if<MeasurementSet>(&scheme_)) {
      RVector pu(aii_.size()), pw(aii_.size());
      for (Index r = 0; r < aii_.size(); ++r) {
        const double cross = 2.0 * c * s * (e * aij_(r)).real();
        pu(r) = c * c * aii_(r) + s * s * ajj_(r) + cross;
        pw(r) = s * s * aii_(r) + c * c * ajj_(r) - cross;
      }
      return kernels::povm_max(*ms, pu, omega_probs_).value +
             kernels::povm_max(*ms, pw, omega_probs_).value;
    }
    const CMatrix cross = c * s * (std::conj(e) * x_ + e * x_.adjoint());
    const CMatrix ru = c * c * rii_ + s * s * rjj_ + cross;
    const CMatrix rw = s * s * rii_ + c * c * rjj_ - cross;
    return trace_distance(ru, omega_s_) + trace_distance(rw, omega_s_);
  }

 private:
  const MeasurementScheme& scheme_;
  const RVector& omega_probs_;
  const CMatrix& omega_s_;
  RVector aii_, ajj_;
  Eigen::VectorXcd aij_;
  CMatrix rii_, rjj_, x_;
};

struct PairOptimum {
  double theta = 0.0;
  double phi = 0.0;
  double value = 0.0;
};

/// Grid scan of (theta, phi) followed by a compass search.
PairOptimum maximise_pair(const PairObjective& f, int n_theta, int n_phi) {
  const double h_theta = 0.5 * M_PI / n_theta, h_phi = 2.0 * M_PI / n_phi;
  PairOptimum best{0.0, 0.0, f(0.0, 0.0)};
  for (int a = 0; a <= n_theta; ++a)
    for (int b = 0; b < n_phi; ++b) {
      const double v = f(a * h_theta, b * h_phi);
      if (v > best.value) best = {a * h_theta, b * h_phi, v};
    }
  // Compass search around the best grid point.
  // The objective has ridges (trace norms), so the step grows again after a
  // successful move and the number of rounds is capped.
  double st = h_theta, sp = h_phi;
  for (int round = 0; round < 400 && (st > 1e-9 || sp > 1e-9); ++round) {
    bool moved = false;
    const double cand[4][2] = {{st, 0.0}, {-st, 0.0}, {0.0, sp}, {0.0, -sp}};
    for (const auto& step : cand) {
      const double t = best.theta + step[0], p = best.phi + step[1];
      const double v = f(t, p);
      if (v > best.value) {
        best = {t, p, v};
        moved = true;
      }
    }
    if (moved) {
      st = std::min(2.0 * st, h_theta);
      sp = std::min(2.0 * sp, h_phi);
    } else {
      st *= 0.5;
      sp *= 0.5;
    }
  }
  return best;
}

std::vector<std::vector<Index>> band_blocks(const EnergyBand& band,
                                            const DegeneracyStructure& degeneracy) {
  std::vector<std::vector<Index>> blocks;
  for (const auto& b : degeneracy.blocks) {
    if (!band.contains(b.front())) continue;
    std::vector<Index> local;
    for (Index i : b) local.push_back(i - band.index_lo);
    blocks.push_back(std::move(local));
  }
  return blocks;
}

double ascend(CMatrix& basis, const std::vector<std::vector<Index>>& blocks,
              const MeasurementScheme& scheme) {
  const BandProbe probe(basis, scheme);
  const RVector& q = probe.omega_probabilities();
  const CMatrix& omega_s = probe.omega_reduced();

  constexpr int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Later sweeps only refine, so a coarse scan is enough there.
    const int n_theta = sweep == 0 ? 16 : 4, n_phi = sweep == 0 ? 32 : 8;
    double gain = 0.0;
    for (const auto& block : blocks) {
      for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t b = a + 1; b < block.size(); ++b) {
          const Index i = block[a], j = block[b];
          const CVector bi = basis.col(i), bj = basis.col(j);
          const PairObjective f(scheme, q, omega_s, bi, bj);
          const double current = f(0.0, 0.0);
          const PairOptimum opt = maximise_pair(f, n_theta, n_phi);
          if (opt.value <= current + 1e-14) continue;
          const double c = std::cos(opt.theta), s = std::sin(opt.theta);
          const cplx e = std::polar(1.0, opt.phi);
          basis.col(i) = c * bi + e * s * bj;
          basis.col(j) = -std::conj(e) * s * bi + c * bj;
          gain += opt.value - current;
        }
    }
    if (gain < 1e-10) break;
  }
  return BandProbe(basis, scheme).per_eigenstate().mean();
}

}  // namespace

DMeanMax dmean_max_heuristic(const EnergyBand& band, const SpectralSystem& sys,
                             const DegeneracyStructure& degeneracy,
                             const MeasurementScheme& scheme, int n_restarts,
                             std::uint64_t seed) {
  const CMatrix base = band_basis(sys, band);
  DMeanMax out;
  out.unrotated = BandProbe(base, scheme).per_eigenstate().mean();
  out.value = out.unrotated;
  out.basis = base;

  const auto blocks = band_blocks(band, degeneracy);
  const bool trivial = std::all_of(blocks.begin(), blocks.end(),
                                   [](const auto& b) { return b.size() < 2; });
  if (trivial) return out;

  Rng rng(seed);
  const int restarts = std::max(1, n_restarts);
  for (int k = 0; k < restarts; ++k) {
    CMatrix basis = base;
    if (k > 0) {
      for (const auto& block : blocks) {
        if (block.size() < 2) continue;
        const auto m = static_cast<Index>(block.size());
        const CMatrix u = haar_unitary(m, rng);
        basis.middleCols(block.front(), m) = (basis.middleCols(block.front(), m) * u).eval();
      }
    }
    const double v = ascend(basis, blocks, scheme);
    if (v > out.value) {
      out.value = v;
      out.basis = basis;
    }
  }
  out.restarts = restarts;
  return out;
}

}  // namespace thermavg
