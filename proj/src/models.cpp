#include "thermavg/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace thermavg {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::random_gue: return "random_gue";
    case ModelKind::spin_chain: return "spin_chain";
    case ModelKind::scarred: return "scarred";
    case ModelKind::explicit_diagonal: return "explicit_diagonal";
    case ModelKind::degenerate_block: return "degenerate_block";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  for (auto k : {ModelKind::random_gue, ModelKind::spin_chain, ModelKind::scarred,
                 ModelKind::explicit_diagonal, ModelKind::degenerate_block})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown model kind '" + name + "'");
}

namespace {

CMatrix gue_matrix(Index dim, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::normal_distribution<double> nhalf(0.0, std::sqrt(0.5));
  CMatrix h(dim, dim);
  for (Index j = 0; j < dim; ++j) {
    h(j, j) = n01(rng);
    for (Index i = j + 1; i < dim; ++i) {
      const double re = nhalf(rng);
      const double im = nhalf(rng);
      h(i, j) = cplx(re, im);
      h(j, i) = cplx(re, -im);
    }
  }
  return h;
}

CMatrix spin_chain_matrix(const ModelSpec& spec) {
  const int n = spec.chain_length;
  const Index dim = Index{1} << n;
  CMatrix h = CMatrix::Zero(dim, dim);
  auto z = [n](Index x, int site) { return ((x >> (n - 1 - site)) & 1) ? -1.0 : 1.0; };
  for (Index x = 0; x < dim; ++x) {
    double diag = 0.0;
    for (int i = 0; i + 1 < n; ++i) diag += spec.coupling * z(x, i) * z(x, i + 1);
    for (int i = 0; i < n; ++i) diag += spec.longitudinal * z(x, i);
    h(x, x) = diag;
    for (int i = 0; i < n; ++i) h(x ^ (Index{1} << (n - 1 - i)), x) += spec.transverse;
  }
  return h;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError("build_hamiltonian: " + msg);
}

BuiltModel build_explicit_diagonal(const ModelSpec& spec) {
  std::vector<double> spectrum = spec.spectrum;
  if (spectrum.empty()) {
    require(spec.dim >= 1, "explicit_diagonal needs a spectrum or dim >= 1");
    spectrum.resize(static_cast<std::size_t>(spec.dim));
    std::iota(spectrum.begin(), spectrum.end(), 0.0);
  }
  const auto d = static_cast<Index>(spectrum.size());
  std::vector<Index> order(spectrum.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return spectrum[static_cast<std::size_t>(a)] < spectrum[static_cast<std::size_t>(b)];
  });
  RVector e(d);
  CMatrix v = CMatrix::Zero(d, d);
  CMatrix h = CMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    e(i) = spectrum[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    v(order[static_cast<std::size_t>(i)], i) = 1.0;
    h(i, i) = spectrum[static_cast<std::size_t>(i)];
  }
  return BuiltModel{SpectralSystem(HermitianOperator(h), e, v), {}};
}

BuiltModel build_scarred(const ModelSpec& spec) {
  const Index dim = spec.dim;
  require(dim >= 8, "scarred needs dim >= 8");
  const Index window = dim / 4;
  const Index start = dim / 2 - dim / 8;
  require(spec.scar_count >= 0 && spec.scar_count < window,
          "scar_count must be below the central window size dim/4");

  Rng rng(spec.seed);
  const SpectralSystem base = eig_hermitian(HermitianOperator::hermitian_part(gue_matrix(dim, rng)));

  std::vector<Index> candidates(static_cast<std::size_t>(window));
  std::iota(candidates.begin(), candidates.end(), start);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  std::vector<Index> scars(candidates.begin(), candidates.begin() + spec.scar_count);
  std::sort(scars.begin(), scars.end());

  std::vector<Index> sites(static_cast<std::size_t>(dim));
  std::iota(sites.begin(), sites.end(), Index{0});
  std::shuffle(sites.begin(), sites.end(), rng);

  const auto s = static_cast<Index>(scars.size());
  CMatrix scar_vecs = CMatrix::Zero(dim, s);
  for (Index j = 0; j < s; ++j) scar_vecs(sites[static_cast<std::size_t>(j)], j) = 1.0;

  std::vector<Index> rest;
  for (Index i = 0; i < dim; ++i)
    if (!std::binary_search(scars.begin(), scars.end(), i)) rest.push_back(i);
  CMatrix w(dim, static_cast<Index>(rest.size()));
  for (std::size_t j = 0; j < rest.size(); ++j) w.col(static_cast<Index>(j)) = base.eigenvectors().col(rest[j]);
  w -= scar_vecs * (scar_vecs.adjoint() * w);
  // Lowdin: W (W^dagger W)^{-1/2} stays closest to the original eigenvectors.
  Eigen::SelfAdjointEigenSolver<CMatrix> es(w.adjoint() * w);
  const RVector inv_sqrt = es.eigenvalues().cwiseSqrt().cwiseInverse();
  w = w * (es.eigenvectors() * inv_sqrt.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint());

  CMatrix v(dim, dim);
  for (Index j = 0; j < s; ++j) v.col(scars[static_cast<std::size_t>(j)]) = scar_vecs.col(j);
  for (std::size_t j = 0; j < rest.size(); ++j) v.col(rest[j]) = w.col(static_cast<Index>(j));

  const RVector& e = base.energies();
  const CMatrix h = v * e.cast<cplx>().asDiagonal() * v.adjoint();
  return BuiltModel{SpectralSystem(HermitianOperator::hermitian_part(h), e, v), scars};
}

BuiltModel build_degenerate_block(const ModelSpec& spec) {
  require(!spec.degeneracy_profile.empty(), "degenerate_block needs a degeneracy_profile");
  std::vector<double> e;
  for (std::size_t b = 0; b < spec.degeneracy_profile.size(); ++b) {
    require(spec.degeneracy_profile[b] >= 1, "block sizes must be >= 1");
    for (int i = 0; i < spec.degeneracy_profile[b]; ++i) e.push_back(static_cast<double>(b));
  }
  const auto d = static_cast<Index>(e.size());
  Rng rng(spec.seed);
  const CMatrix u = haar_unitary(d, rng);
  RVector ev = Eigen::Map<const RVector>(e.data(), d);
  const CMatrix h = u * ev.cast<cplx>().asDiagonal() * u.adjoint();
  return BuiltModel{eig_hermitian(HermitianOperator::hermitian_part(h)), {}};
}

}  // namespace

BuiltModel build_model(const ModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::random_gue: {
      require(spec.dim >= 1, "random_gue needs dim >= 1");
      Rng rng(spec.seed);
      return BuiltModel{eig_hermitian(HermitianOperator::hermitian_part(gue_matrix(spec.dim, rng))), {}};
    }
    case ModelKind::spin_chain:
      require(spec.chain_length >= 2, "spin_chain needs chain_length >= 2");
      require(spec.chain_length <= 10, "spin_chain limited to chain_length <= 10 (dim 1024)");
      return BuiltModel{eig_hermitian(HermitianOperator(spin_chain_matrix(spec))), {}};
    case ModelKind::scarred:
      return build_scarred(spec);
    case ModelKind::explicit_diagonal:
      return build_explicit_diagonal(spec);
    case ModelKind::degenerate_block:
      return build_degenerate_block(spec);
  }
  throw ValidationError("build_hamiltonian: unknown kind");
}

SpectralSystem build_hamiltonian(const ModelSpec& spec) { return build_model(spec).sys; }

// -----------------------------------------------------------------------------

GapReport nondegenerate_gaps_check(const SpectralSystem& sys, double tol) {
  const RVector& e = sys.energies();
  const Index d = e.size();
  GapReport rep;
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(d * (d - 1) / 2));
  for (Index a = 1; a < d; ++a) {
    if (e(a) - e(a - 1) <= tol) ++rep.gap_collision_count;
    for (Index b = 0; b < a; ++b) gaps.push_back(e(a) - e(b));
  }
  std::sort(gaps.begin(), gaps.end());
  for (std::size_t i = 1; i < gaps.size(); ++i)
    if (gaps[i] - gaps[i - 1] <= tol) ++rep.gap_collision_count;
  rep.is_nondegenerate = rep.gap_collision_count == 0;
  return rep;
}

MeasurementSet build_eigenbasis_measurements(const EnergyBand& band, const SpectralSystem& sys) {
  const CMatrix basis = band_basis(sys, band);
  std::vector<Povm> povms;
  povms.reserve(static_cast<std::size_t>(band.d));
  for (Index n = 0; n < band.d; ++n) {
    const CVector v = basis.col(n);
    povms.emplace_back(std::vector<Outcome>{Outcome::projector(v), Outcome::complement(v)});
  }
  return MeasurementSet(std::move(povms), "eigenbasis");
}

MeasurementSet build_random_coarse_measurements(Index dim, int n_povms, int outcomes_per_povm,
                                                std::uint64_t seed) {
  if (outcomes_per_povm < 2)
    throw ValidationError("build_random_coarse_measurements: need at least 2 outcomes per POVM");
  if (n_povms < 1 || dim < 1)
    throw ValidationError("build_random_coarse_measurements: need n_povms >= 1 and dim >= 1");

  int reseeds = 0;
  std::vector<Povm> povms;
  for (int m = 0; m < n_povms; ++m) {
    for (;;) {
      Rng rng(derive_seed(seed + static_cast<std::uint64_t>(reseeds), static_cast<std::uint64_t>(m)));
      std::vector<CMatrix> a;
      CMatrix s = CMatrix::Zero(dim, dim);
      for (int r = 0; r < outcomes_per_povm; ++r) {
        const CMatrix g = complex_gaussian_matrix(dim, dim, rng);
        a.push_back(g * g.adjoint());
        s += a.back();
      }
      Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (s + s.adjoint()));
      const RVector& lam = es.eigenvalues();
      if (!(lam(0) > 1e-12 * lam(dim - 1))) {
        ++reseeds;
        continue;
      }
      const CMatrix s_inv_half = es.eigenvectors() *
                                 lam.cwiseSqrt().cwiseInverse().cast<cplx>().asDiagonal() *
                                 es.eigenvectors().adjoint();
      std::vector<Outcome> outs;
      for (const auto& ar : a)
        outs.push_back(Outcome::dense(HermitianOperator::hermitian_part(s_inv_half * ar * s_inv_half)));
      povms.emplace_back(std::move(outs));
      break;
    }
  }
  std::ostringstream label;
  label << "random_coarse(seed=" << seed << ", reseeds=" << reseeds << ")";
  return MeasurementSet(std::move(povms), label.str());
}

// -----------------------------------------------------------------------------

CVector random_band_state(const SpectralSystem& sys, const EnergyBand& band, Rng& rng) {
  const CVector c = haar_vector(band.d, rng);
  return band_basis(sys, band) * c;
}

CVector random_pure_state(Index dim, Rng& rng) { return haar_vector(dim, rng); }

DensityMatrix random_mixed_state(Index dim, Index rank, Rng& rng) {
  if (rank < 1 || rank > dim) throw ValidationError("random_mixed_state: invalid rank");
  const CMatrix g = complex_gaussian_matrix(dim, rank, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::trusted(rho);
}

CVector profiled_state(const SpectralSystem& sys, const EnergyBand& band, double tail_weight,
                       Rng& rng) {
  if (tail_weight < 0.0 || tail_weight >= 1.0)
    throw ValidationError("profiled_state: tail_weight must lie in [0, 1)");
  const Index d = sys.dim();
  const RVector& e = sys.energies();
  const double lo = e(band.index_lo), hi = e(band.index_hi);
  const double centre = 0.5 * (lo + hi);
  const double width = std::max(hi - lo, 1e-12);

  RVector p = RVector::Zero(d);
  double in = 0.0, out = 0.0;
  for (Index n = 0; n < d; ++n) {
    // Narrow envelope inside the band, broad one for the tails.
    const double sigma = band.contains(n) ? 0.5 * width : 1.0 * width;
    const double x = (e(n) - centre) / sigma;
    p(n) = std::exp(-0.5 * x * x) + 1e-300;
    (band.contains(n) ? in : out) += p(n);
  }
  if (tail_weight > 0.0 && out == 0.0)
    throw ValidationError("profiled_state: band covers the whole spectrum, no room for tails");
  for (Index n = 0; n < d; ++n)
    p(n) = band.contains(n) ? p(n) * (1.0 - tail_weight) / in
                            : (out > 0.0 ? p(n) * tail_weight / out : 0.0);

  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  CVector c(d);
  for (Index n = 0; n < d; ++n) c(n) = std::polar(std::sqrt(p(n)), phase(rng));
  return sys.eigenvectors() * c;
}

}  // namespace thermavg
