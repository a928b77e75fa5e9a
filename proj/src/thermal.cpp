#include "thermavg/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "thermavg/tolerances.hpp"

namespace thermavg {

namespace {

EnergyBand make_band(const SpectralSystem& sys, Index lo, Index hi) {
  EnergyBand band;
  band.index_lo = lo;
  band.index_hi = hi;
  band.d = hi - lo + 1;
  band.e_min = sys.energies()(lo);
  band.e_max = sys.energies()(hi);
  band.system_dim = sys.dim();
  const auto cols = sys.eigenvectors().middleCols(lo, band.d);
  band.projector = cols * cols.adjoint();
  band.projector = 0.5 * (band.projector + band.projector.adjoint()).eval();
  return band;
}

void require_band_in(const SpectralSystem& sys, const EnergyBand& band) {
  if (band.system_dim != sys.dim() || band.index_lo < 0 || band.index_hi >= sys.dim() ||
      band.index_lo > band.index_hi)
    throw ValidationError("EnergyBand does not belong to this system");
}

}  // namespace

EnergyBand select_band(const SpectralSystem& sys, double e_min, double width) {
  const RVector& e = sys.energies();
  const double e_max = e_min + width;
  Index lo = -1, hi = -1;
  for (Index i = 0; i < e.size(); ++i) {
    if (e(i) >= e_min && e(i) <= e_max) {
      if (lo < 0) lo = i;
      hi = i;
    }
  }
  if (lo < 0) {
    std::ostringstream os;
    os << "select_band: no eigenvalue in [" << e_min << ", " << e_max << "]";
    throw ValidationError(os.str());
  }
  EnergyBand band = make_band(sys, lo, hi);
  band.e_min = e_min;
  band.e_max = e_max;
  return band;
}

EnergyBand select_band_by_index(const SpectralSystem& sys, Index lo, Index hi) {
  if (lo < 0 || hi >= sys.dim() || lo > hi) {
    std::ostringstream os;
    os << "select_band_by_index: invalid range [" << lo << ", " << hi << "] for dimension "
       << sys.dim();
    throw ValidationError(os.str());
  }
  const auto& cls = sys.class_of();
  if ((lo > 0 && cls[static_cast<std::size_t>(lo - 1)] == cls[static_cast<std::size_t>(lo)]) ||
      (hi + 1 < sys.dim() &&
       cls[static_cast<std::size_t>(hi + 1)] == cls[static_cast<std::size_t>(hi)]))
    throw ValidationError("select_band_by_index: range splits a degenerate eigenspace");
  return make_band(sys, lo, hi);
}

EnergyBand select_band_by_fraction(const SpectralSystem& sys, double lo_frac, double hi_frac) {
  if (!(lo_frac <= hi_frac)) throw ValidationError("select_band_by_fraction: lo > hi");
  const double e0 = sys.energies()(0);
  const double range = sys.energies()(sys.dim() - 1) - e0;
  return select_band(sys, e0 + lo_frac * range, (hi_frac - lo_frac) * range);
}

CMatrix band_basis(const SpectralSystem& sys, const EnergyBand& band) {
  require_band_in(sys, band);
  return sys.eigenvectors().middleCols(band.index_lo, band.d);
}

DensityMatrix microcanonical(const EnergyBand& band) {
  return DensityMatrix::trusted(band.projector / static_cast<double>(band.d));
}

// -----------------------------------------------------------------------------

TimeAveragedState mixture(const CMatrix& basis, const RVector& weights) {
  if (weights.size() != basis.cols()) throw ValidationError("mixture: weight count mismatch");
  const auto& tol = tolerances();
  if (weights.size() == 0 || weights.minCoeff() < -tol.weight)
    throw ValidationError("mixture: negative weight");
  if (std::abs(weights.sum() - 1.0) > tol.trace)
    throw ValidationError("mixture: weights do not sum to 1");
  CMatrix m = basis * weights.cast<cplx>().asDiagonal() * basis.adjoint();
  return TimeAveragedState{weights, basis, DensityMatrix::trusted(m)};
}

TimeAveragedState time_average(const DensityMatrix& rho0, const SpectralSystem& sys) {
  if (rho0.dim() != sys.dim()) throw ValidationError("time_average: dimension mismatch");
  const CMatrix& v = sys.eigenvectors();
  const CMatrix rho_e = v.adjoint() * rho0.matrix() * v;

  const Index d = sys.dim();
  RVector weights(d);
  CMatrix basis(d, d);
  for (const auto& block : sys.degeneracy_classes()) {
    const Index lo = block.front();
    const auto k = static_cast<Index>(block.size());
    if (k == 1) {
      weights(lo) = rho_e(lo, lo).real();
      basis.col(lo) = v.col(lo);
      continue;
    }
    const CMatrix sub = rho_e.block(lo, lo, k, k);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (sub + sub.adjoint()));
    weights.segment(lo, k) = es.eigenvalues();
    basis.middleCols(lo, k) = v.middleCols(lo, k) * es.eigenvectors();
  }
  CMatrix m = basis * weights.cast<cplx>().asDiagonal() * basis.adjoint();
  return TimeAveragedState{weights, basis, DensityMatrix::trusted(m)};
}

// -----------------------------------------------------------------------------

CMatrix DegeneracyStructure::projector(std::size_t m) const {
  const auto& b = blocks.at(m);
  const Index d = eigenvectors.rows();
  CMatrix p = CMatrix::Zero(d, d);
  for (Index i : b) p += eigenvectors.col(i) * eigenvectors.col(i).adjoint();
  return p;
}

double DegeneracyStructure::weight(std::size_t m, const CMatrix& x) const {
  double w = 0.0;
  for (Index i : blocks.at(m)) w += eigenvectors.col(i).dot(x * eigenvectors.col(i)).real();
  return w;
}

DegeneracyStructure degeneracy_structure(const SpectralSystem& sys) {
  DegeneracyStructure deg;
  deg.blocks = sys.degeneracy_classes();
  deg.eigenvectors = sys.eigenvectors();
  deg.g = sys.max_degeneracy();
  return deg;
}

DegeneracyStructure band_degeneracy(const SpectralSystem& sys, const EnergyBand& band) {
  require_band_in(sys, band);
  DegeneracyStructure deg;
  deg.eigenvectors = sys.eigenvectors();
  deg.g = 0;
  for (const auto& b : sys.degeneracy_classes()) {
    if (!band.contains(b.front())) continue;
    deg.blocks.push_back(b);
    deg.g = std::max(deg.g, b.size());
  }
  return deg;
}

double effective_dimension(const TimeAveragedState& omega) {
  const double s = omega.weights.squaredNorm();
  if (!(s > 0.0)) throw ValidationError("effective_dimension: zero weights");
  return 1.0 / s;
}

double effective_dimension(const TimeAveragedState& omega, const DegeneracyStructure& deg) {
  double s = 0.0;
  for (std::size_t m = 0; m < deg.blocks.size(); ++m) {
    const double w = deg.weight(m, omega.matrix.matrix());
    s += w * w;
  }
  if (!(s > 0.0)) throw ValidationError("effective_dimension: state has no weight on the blocks");
  return 1.0 / s;
}

DeffSandwich deff_sandwich(const TimeAveragedState& omega, const DegeneracyStructure& deg) {
  const double s = omega.weights.squaredNorm();
  if (!(s > 0.0)) throw ValidationError("deff_sandwich: zero weights");
  return DeffSandwich{1.0 / (static_cast<double>(deg.g) * s), 1.0 / s};
}

// -----------------------------------------------------------------------------

DensityMatrix evolve(const DensityMatrix& rho0, const SpectralSystem& sys, double t) {
  if (rho0.dim() != sys.dim()) throw ValidationError("evolve: dimension mismatch");
  if (t == 0.0) return rho0;
  const CMatrix& v = sys.eigenvectors();
  CVector phase(sys.dim());
  for (Index n = 0; n < sys.dim(); ++n) phase(n) = std::polar(1.0, -sys.energies()(n) * t);
  const CMatrix u = v * phase.asDiagonal() * v.adjoint();
  return DensityMatrix::trusted(u * rho0.matrix() * u.adjoint());
}

CVector evolve(const CVector& psi0, const SpectralSystem& sys, double t) {
  if (psi0.size() != sys.dim()) throw ValidationError("evolve: dimension mismatch");
  const CMatrix& v = sys.eigenvectors();
  CVector c = v.adjoint() * psi0;
  for (Index n = 0; n < sys.dim(); ++n) c(n) *= std::polar(1.0, -sys.energies()(n) * t);
  return v * c;
}

// -----------------------------------------------------------------------------

TailsDecomposition tails_decompose(const TimeAveragedState& omega_full, const EnergyBand& band) {
  const Index d = omega_full.matrix.dim();
  if (band.system_dim != d) throw ValidationError("tails_decompose: band/state dimension mismatch");
  const CMatrix& pi = band.projector;
  const CMatrix& w = omega_full.matrix.matrix();
  const double in_band = trace_product(pi, w);
  const double delta = std::clamp(1.0 - in_band, 0.0, 1.0);
  if (1.0 - delta <= tolerances().tails_zero)
    throw ValidationError("tails_decompose: state lies entirely outside the band");

  TailsDecomposition out{delta, omega_full, std::nullopt};
  RVector wb = RVector::Zero(omega_full.weights.size());
  wb.segment(band.index_lo, band.d) = omega_full.weights.segment(band.index_lo, band.d);
  wb /= wb.sum();
  const CMatrix inside = pi * w * pi / (1.0 - delta);
  out.omega_band = TimeAveragedState{wb, omega_full.basis, DensityMatrix::trusted(inside)};

  if (delta > tolerances().tails_zero) {
    const CMatrix q = CMatrix::Identity(d, d) - pi;
    out.omega_comp = DensityMatrix::trusted(q * w * q / delta);
  }
  return out;
}

double min_nonzero_gap(const SpectralSystem& sys) {
  const RVector& e = sys.energies();
  const double tol = sys.degeneracy_tolerance();
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 1; i < e.size(); ++i) {
    const double g = e(i) - e(i - 1);
    if (g > tol) best = std::min(best, g);
  }
  return std::isfinite(best) ? best : 0.0;
}

}  // namespace thermavg
