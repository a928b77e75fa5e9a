#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "thermavg/distinguish.hpp"
#include "thermavg/models.hpp"

using namespace thermavg;

namespace {

struct Diagonal {
  SpectralSystem sys;
  EnergyBand band;
  MeasurementSet ms;
};

Diagonal diagonal_system(int d) {
  ModelSpec spec;
  spec.kind = ModelKind::explicit_diagonal;
  spec.dim = d;
  SpectralSystem sys = build_hamiltonian(spec);
  EnergyBand band = select_band_by_index(sys, 0, d - 1);
  MeasurementSet ms = build_eigenbasis_measurements(band, sys);
  return {std::move(sys), std::move(band), std::move(ms)};
}

Povm dense_binary(const CMatrix& p) {
  const Index d = p.rows();
  return Povm({Outcome::dense(HermitianOperator::hermitian_part(p)),
               Outcome::dense(HermitianOperator::hermitian_part(CMatrix::Identity(d, d) - p))});
}

}  // namespace

TEST_CASE("dist_single") {
  Rng rng(1);
  const DensityMatrix rho(testing::random_density(4, rng));
  const MeasurementSet ms = build_random_coarse_measurements(4, 1, 3, 2);
  CHECK(dist_single(rho, rho, ms.povms()[0]) == 0.0);

  // Eigenbasis POVM on (rho_n, Omega), d = 4: 1 - 1/d.
  const Diagonal dg = diagonal_system(4);
  const DensityMatrix omega = microcanonical(dg.band);
  CHECK(dist_single(dg.sys.eigenstate(2), omega, dg.ms.povms()[2]) == doctest::Approx(0.75).epsilon(1e-14));

  // Binary {P, I - P}: two-term cancellation leaves |tr(P (rho - sigma))|.
  const DensityMatrix sigma(testing::random_density(4, rng));
  const CMatrix p = testing::projector(haar_vector(4, rng));
  const double expect = std::abs((p * (rho.matrix() - sigma.matrix())).trace().real());
  CHECK(dist_single(rho, sigma, dense_binary(p)) == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(dist_single(rho, DensityMatrix::maximally_mixed(3), ms.povms()[0]), ValidationError);
}

TEST_CASE("dist_set") {
  const Diagonal dg = diagonal_system(10);
  const DensityMatrix omega = microcanonical(dg.band);
  const auto r = dist_set(dg.sys.eigenstate(3), omega, dg.ms);
  CHECK(r.value == doctest::Approx(0.9).epsilon(1e-14));
  // Ties resolve to the eigenstate's own POVM: it is the only maximiser here.
  CHECK(r.povm_index == 3);
  CHECK_THROWS_AS(dist_set(omega, omega, MeasurementSet(std::vector<Povm>{})), ValidationError);

  Rng rng(3);
  const MeasurementSet a = build_random_coarse_measurements(5, 2, 2, 10);
  std::vector<Povm> bigger = a.povms();
  const MeasurementSet extra = build_random_coarse_measurements(5, 3, 3, 11);
  for (const auto& p : extra.povms()) bigger.push_back(p);
  const MeasurementSet b(bigger);
  for (int t = 0; t < 25; ++t) {
    const DensityMatrix x(testing::random_density(5, rng)), y(testing::random_density(5, rng));
    CHECK(dist_set(x, y, a).value == doctest::Approx(dist_single(x, y, a.povms()[dist_set(x, y, a).povm_index])));
    CHECK(dist_set(x, y, b).value >= dist_set(x, y, a).value);
    // Data processing.
    CHECK(dist_set(x, y, b).value <= trace_distance(x, y) + 1e-10);
  }
}

TEST_CASE("subsystem distance and the Helstrom measurement") {
  Rng rng(4);
  const SubsystemPartition part{2, 2, SubsystemPosition::first};
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix rho(testing::random_density(4, rng)), sigma(testing::random_density(4, rng));
    const double ds = subsystem_distance(rho, sigma, part);
    const CMatrix diff = testing::partial_trace_oracle(rho.matrix() - sigma.matrix(), 2, 2, true);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(diff);
    CMatrix pos = CMatrix::Zero(2, 2);
    for (Index i = 0; i < 2; ++i)
      if (es.eigenvalues()(i) > 0) pos += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    const Povm helstrom = dense_binary(testing::kron(pos, CMatrix::Identity(2, 2)));
    CHECK(dist_single(rho, sigma, helstrom) == doctest::Approx(ds).epsilon(1e-10));
    // Random product-form binary POVMs never beat it.
    for (int k = 0; k < 10; ++k) {
      const CMatrix q = testing::projector(haar_vector(2, rng));
      CHECK(dist_single(rho, sigma, dense_binary(testing::kron(q, CMatrix::Identity(2, 2)))) <= ds + 1e-12);
    }
  }
  // Differences only on the bath are invisible.
  const CMatrix s = testing::random_density(2, rng);
  const DensityMatrix a(testing::kron(s, testing::random_density(3, rng)));
  const DensityMatrix b(testing::kron(s, testing::random_density(3, rng)));
  CHECK(subsystem_distance(a, b, SubsystemPartition{2, 3}) < 1e-14);
  CHECK(subsystem_distance(a, a, SubsystemPartition{2, 3}) == 0.0);
  CHECK_THROWS_AS(subsystem_distance(a, b, SubsystemPartition{4, 2}), ValidationError);
}

TEST_CASE("eigenstate statistics") {
  for (int d : {2, 5, 16}) {
    const Diagonal dg = diagonal_system(d);
    const auto st = eigenstate_stats(dg.band, dg.sys, dg.ms);
    const double v = 1.0 - 1.0 / d;
    CHECK(st.mean == doctest::Approx(v).epsilon(1e-14));
    CHECK(st.rms == doctest::Approx(v).epsilon(1e-14));
    CHECK(st.max == doctest::Approx(v).epsilon(1e-14));
  }
  const Diagonal one = diagonal_system(3);
  const EnergyBand b1 = select_band_by_index(one.sys, 1, 1);
  const auto st1 = eigenstate_stats(b1, one.sys, build_eigenbasis_measurements(b1, one.sys));
  CHECK(st1.mean == 0.0);
  CHECK(st1.max == 0.0);

  RVector bad(2);
  bad << 0.5, 1.5;
  CHECK_THROWS_AS(summarize(bad), std::logic_error);
}

TEST_CASE("scar is the worst eigenstate on a half-chain-like partition") {
  ModelSpec spec;
  spec.kind = ModelKind::scarred;
  spec.dim = 64;
  spec.scar_count = 2;
  spec.seed = 12;
  const BuiltModel m = build_model(spec);
  const EnergyBand band = select_band_by_index(m.sys, 16, 47);
  const SubsystemPartition part{2, 32, SubsystemPosition::first};
  const auto st = eigenstate_stats(band, m.sys, part);
  // Per-eigenstate scan with the oracle partial trace.
  const DensityMatrix omega = microcanonical(band);
  const CMatrix omega_s = testing::partial_trace_oracle(omega.matrix(), 2, 32, true);
  Index best = 0;
  double best_v = -1.0;
  for (Index n = 0; n < band.d; ++n) {
    const CVector v = m.sys.eigenvector(band.index_lo + n);
    const double x = testing::trace_distance_oracle(
        testing::partial_trace_oracle(v * v.adjoint(), 2, 32, true), omega_s);
    CHECK(st.per_eigenstate(n) == doctest::Approx(x).epsilon(1e-10));
    if (x > best_v) {
      best_v = x;
      best = n;
    }
  }
  CHECK(st.argmax == best);
  CHECK(std::find(m.scar_indices.begin(), m.scar_indices.end(), band.index_lo + st.argmax) !=
        m.scar_indices.end());
}

TEST_CASE("band probe mixtures match the dense route") {
  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = 24;
  spec.seed = 3;
  const SpectralSystem sys = build_hamiltonian(spec);
  const EnergyBand band = select_band_by_index(sys, 6, 17);
  const CMatrix basis = band_basis(sys, band);
  const DensityMatrix omega = microcanonical(band);
  const MeasurementSet ms = build_random_coarse_measurements(24, 2, 3, 5);
  Rng rng(9);
  for (const MeasurementScheme& scheme :
       {MeasurementScheme(ms), MeasurementScheme(SubsystemPartition{4, 6, SubsystemPosition::last})}) {
    const BandProbe probe(basis, scheme);
    for (int t = 0; t < 5; ++t) {
      RVector w = RVector::NullaryExpr(band.d, [&] { return std::uniform_real_distribution<double>(0, 1)(rng); });
      w /= w.sum();
      const TimeAveragedState om = mixture(basis, w);
      CHECK(probe.mixture_distance(w) ==
            doctest::Approx(distinguishability(om.matrix, omega, scheme)).epsilon(1e-12));
      // Convexity chain.
      CHECK(probe.mixture_distance(w) <= w.dot(probe.per_eigenstate()) + 1e-12);
      CHECK(w.dot(probe.per_eigenstate()) <= probe.per_eigenstate().maxCoeff() + 1e-12);
    }
  }
}

namespace {

/// Mean D over the band basis with the 2-dim block {i, i+1} rotated.
double rotated_mean(const CMatrix& basis, Index i, double theta, double phi,
                    const MeasurementScheme& scheme) {
  CMatrix b = basis;
  const cplx e = std::polar(1.0, phi);
  const double c = std::cos(theta), s = std::sin(theta);
  b.col(i) = c * basis.col(i) + e * s * basis.col(i + 1);
  b.col(i + 1) = -std::conj(e) * s * basis.col(i) + c * basis.col(i + 1);
  const DensityMatrix omega = DensityMatrix::trusted(b * b.adjoint() / static_cast<double>(b.cols()));
  double sum = 0.0;
  for (Index n = 0; n < b.cols(); ++n)
    sum += distinguishability(DensityMatrix::pure(b.col(n)), omega, scheme);
  return sum / static_cast<double>(b.cols());
}

/// Grid scan over (theta, phi) with repeated zooming around the best cell.
double grid_oracle(const CMatrix& basis, Index i, const MeasurementScheme& scheme) {
  double t0 = 0.0, t1 = M_PI / 2, p0 = 0.0, p1 = 2 * M_PI;
  double best = -1.0, bt = 0.0, bp = 0.0;
  for (int level = 0; level < 7; ++level) {
    const int nt = 40, np = 40;
    for (int a = 0; a <= nt; ++a)
      for (int b = 0; b <= np; ++b) {
        const double t = t0 + (t1 - t0) * a / nt, p = p0 + (p1 - p0) * b / np;
        const double v = rotated_mean(basis, i, t, p, scheme);
        if (v > best) {
          best = v;
          bt = t;
          bp = p;
        }
      }
    const double ht = 2.0 * (t1 - t0) / nt, hp = 2.0 * (p1 - p0) / np;
    t0 = bt - ht;
    t1 = bt + ht;
    p0 = bp - hp;
    p1 = bp + hp;
  }
  return best;
}

}  // namespace

TEST_CASE("dmean_max heuristic") {
  // Nondegenerate: the plain mean.
  ModelSpec gue;
  gue.kind = ModelKind::random_gue;
  gue.dim = 16;
  const SpectralSystem s1 = build_hamiltonian(gue);
  const EnergyBand b1 = select_band_by_index(s1, 4, 11);
  const MeasurementSet m1 = build_random_coarse_measurements(16, 1, 2, 3);
  const auto r1 = dmean_max_heuristic(b1, s1, band_degeneracy(s1, b1), m1, 3, 1);
  CHECK(r1.value == eigenstate_stats(b1, s1, m1).mean);

  // One 2-dim block: compare against the grid oracle.
  ModelSpec spec;
  spec.kind = ModelKind::degenerate_block;
  spec.degeneracy_profile = {1, 2, 1};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    spec.seed = seed;
    const SpectralSystem sys = build_hamiltonian(spec);
    const EnergyBand band = select_band_by_index(sys, 0, 3);
    const CMatrix basis = band_basis(sys, band);
    for (const MeasurementScheme& scheme :
         {MeasurementScheme(build_random_coarse_measurements(4, 1, 2, seed + 10)),
          MeasurementScheme(SubsystemPartition{2, 2, SubsystemPosition::first})}) {
      const auto r = dmean_max_heuristic(band, sys, band_degeneracy(sys, band), scheme, 4, seed);
      const double oracle = grid_oracle(basis, 1, scheme);
      CHECK(r.value == doctest::Approx(oracle).epsilon(1e-6));
      CHECK(r.value >= r.unrotated);
      CHECK(r.value == doctest::Approx(BandProbe(r.basis, scheme).per_eigenstate().mean()));
    }
  }
}
