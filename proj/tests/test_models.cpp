#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "thermavg/models.hpp"

using namespace thermavg;

TEST_CASE("GUE normalisation") {
  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = 200;
  spec.seed = 4;
  const SpectralSystem sys = build_hamiltonian(spec);
  const CMatrix& h = sys.hamiltonian().matrix();
  double off = 0.0, diag = 0.0;
  for (Index i = 0; i < 200; ++i) {
    diag += std::norm(h(i, i));
    for (Index j = i + 1; j < 200; ++j) off += std::norm(h(i, j));
  }
  CHECK(off / (200.0 * 199.0 / 2.0) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(diag / 200.0 == doctest::Approx(1.0).epsilon(0.25));
  // Semicircle edge at 2 sqrt(dim).
  CHECK(sys.energies()(199) == doctest::Approx(2.0 * std::sqrt(200.0)).epsilon(0.08));
  CHECK_FALSE(sys.is_degenerate());

  spec.seed = 5;
  CHECK((build_hamiltonian(spec).energies() - sys.energies()).norm() > 1.0);
  spec.seed = 4;
  CHECK((build_hamiltonian(spec).energies() - sys.energies()).norm() == 0.0);
}

TEST_CASE("spin chain") {
  ModelSpec spec;
  spec.kind = ModelKind::spin_chain;
  spec.chain_length = 3;
  const SpectralSystem sys = build_hamiltonian(spec);
  CHECK(sys.dim() == 8);
  // <000|H|000> = 2J + 3 h_z with z = +1 for bit 0.
  CHECK(sys.hamiltonian().matrix()(0, 0).real() == doctest::Approx(2.0 + 3.0 * 0.8));
  // Site 0 is the most significant bit.
  CHECK(sys.hamiltonian().matrix()(4, 0).real() == doctest::Approx(0.9));
  CHECK(sys.energies().sum() == doctest::Approx(sys.hamiltonian().matrix().trace().real()));

  spec.chain_length = 8;
  const SpectralSystem big = build_hamiltonian(spec);
  CHECK(nondegenerate_gaps_check(big, 1e-9).is_nondegenerate);

  spec.chain_length = 11;
  CHECK_THROWS_AS(build_hamiltonian(spec), ValidationError);
}

TEST_CASE("explicit diagonal and degenerate block") {
  ModelSpec spec;
  spec.kind = ModelKind::explicit_diagonal;
  spec.spectrum = {3.0, 1.0, 2.0};
  const SpectralSystem sys = build_hamiltonian(spec);
  CHECK(sys.energies()(0) == 1.0);
  CHECK(std::abs(sys.eigenvectors()(1, 0)) == 1.0);

  spec = {};
  spec.kind = ModelKind::degenerate_block;
  spec.degeneracy_profile = {2, 3, 1};
  spec.seed = 9;
  const SpectralSystem deg = build_hamiltonian(spec);
  REQUIRE(deg.degeneracy_classes().size() == 3);
  CHECK(deg.degeneracy_classes()[1].size() == 3);
  CHECK(deg.max_degeneracy() == 3);
  CHECK_FALSE(nondegenerate_gaps_check(deg, 1e-9).is_nondegenerate);
}

TEST_CASE("scarred model") {
  ModelSpec spec;
  spec.kind = ModelKind::scarred;
  spec.dim = 64;
  spec.scar_count = 3;
  spec.seed = 2;
  const BuiltModel m = build_model(spec);
  REQUIRE(m.scar_indices.size() == 3);
  for (Index s : m.scar_indices) {
    CHECK(s >= 64 / 2 - 64 / 8);
    CHECK(s < 64 / 2 + 64 / 8);
    const CVector v = m.sys.eigenvector(s);
    // A computational basis vector.
    CHECK(v.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
    CHECK(v.squaredNorm() == doctest::Approx(1.0));
  }
  spec.scar_count = 16;
  CHECK_THROWS_AS(build_model(spec), ValidationError);
}

TEST_CASE("measurement builders") {
  const MeasurementSet ms = build_random_coarse_measurements(10, 3, 4, 21);
  CHECK(ms.size() == 3);
  CHECK(ms.total_outcomes() == 12);
  for (const auto& p : ms.povms()) {
    CMatrix sum = CMatrix::Zero(10, 10);
    for (const auto& o : p.outcomes()) sum += o.dense_matrix();
    CHECK((sum - CMatrix::Identity(10, 10)).norm() < 1e-10);
  }
  const MeasurementSet again = build_random_coarse_measurements(10, 3, 4, 21);
  CHECK((again.povms()[1][2].op() - ms.povms()[1][2].op()).norm() == 0.0);
  CHECK_THROWS_AS(build_random_coarse_measurements(10, 1, 1, 0), ValidationError);

  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = 12;
  const SpectralSystem sys = build_hamiltonian(spec);
  const EnergyBand band = select_band_by_index(sys, 2, 7);
  const MeasurementSet eb = build_eigenbasis_measurements(band, sys);
  CHECK(eb.size() == 6);
  CHECK(eb.total_outcomes() == 12);
}

TEST_CASE("state generators") {
  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = 40;
  spec.seed = 1;
  const SpectralSystem sys = build_hamiltonian(spec);
  const EnergyBand band = select_band_by_index(sys, 10, 29);
  Rng rng(8);

  const CVector psi = random_band_state(sys, band, rng);
  CHECK(psi.norm() == doctest::Approx(1.0));
  CHECK(psi.dot(band.projector * psi).real() == doctest::Approx(1.0));

  const CVector prof = profiled_state(sys, band, 0.05, rng);
  CHECK(prof.norm() == doctest::Approx(1.0));
  CHECK(1.0 - prof.dot(band.projector * prof).real() == doctest::Approx(0.05).epsilon(1e-10));

  const DensityMatrix mixed = random_mixed_state(40, 3, rng);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mixed.matrix());
  CHECK(es.eigenvalues()(36) < 1e-12);
  CHECK(es.eigenvalues()(37) > 1e-6);
}
