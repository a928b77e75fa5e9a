#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "thermavg/adversarial.hpp"
#include "thermavg/bounds.hpp"
#include "thermavg/models.hpp"

using namespace thermavg;

namespace {

SpectralSystem diagonal(int d) {
  ModelSpec spec;
  spec.kind = ModelKind::explicit_diagonal;
  spec.dim = d;
  return build_hamiltonian(spec);
}

SpectralSystem gue(int d, std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = d;
  spec.seed = seed;
  return build_hamiltonian(spec);
}

}  // namespace

TEST_CASE("check names round-trip") {
  for (BoundName n : {BoundName::equilibration, BoundName::convexity_chain, BoundName::thm1_rms,
                      BoundName::thm1_mean, BoundName::thm2_finite, BoundName::thm2_subsystem,
                      BoundName::tails, BoundName::deff_sandwich, BoundName::thm3_finite,
                      BoundName::thm3_subsystem})
    CHECK(bound_name_from_string(to_string(n)) == n);
  CHECK_THROWS_AS(bound_name_from_string("nope"), ValidationError);
  CHECK_FALSE(is_theorem_class(BoundName::equilibration));
  CHECK(is_theorem_class(BoundName::tails));

  const BoundCheck c = make_check(BoundName::tails, 1.0, 1.0 - 1e-9);
  CHECK(c.passed());
  CHECK(c.margin == doctest::Approx(-1e-9));
  CHECK(make_check(BoundName::tails, 1.0, 0.9).status == CheckStatus::failed);
}

TEST_CASE("thm1 with omega equal to Omega") {
  const SpectralSystem sys = gue(32, 1);
  const EnergyBand band = select_band_by_index(sys, 8, 23);
  const MeasurementSet ms = build_random_coarse_measurements(32, 2, 2, 3);
  const TimeAveragedState omega = mixture(band_basis(sys, band), RVector::Constant(16, 1.0 / 16));
  const auto [rms, mean] = check_thm1(omega, band, sys, MeasurementScheme(ms));
  CHECK(rms.lhs == doctest::Approx(0.0).scale(1.0));
  CHECK(mean.lhs < 1e-14);
  CHECK(rms.passed());
  CHECK(mean.passed());
  CHECK(mean.d_eff == doctest::Approx(16.0));
}

TEST_CASE("thm1 rhs at d_eff = d/4") {
  const SpectralSystem sys = gue(40, 2);
  const EnergyBand band = select_band_by_index(sys, 0, 39);
  const MeasurementSet ms = build_random_coarse_measurements(40, 3, 2, 4);
  const CMatrix basis = band_basis(sys, band);
  const BandProbe probe(basis, MeasurementScheme(ms));
  RVector w = RVector::Zero(40);
  w.segment(5, 10).setConstant(0.1);
  const auto [rms, mean] = check_thm1(w, probe);
  const double dmean = probe.per_eigenstate().mean();
  const double drms = std::sqrt(probe.per_eigenstate().squaredNorm() / 40.0);
  // sqrt(D (d/d_eff - 1)) = sqrt(3 D).
  CHECK(mean.rhs == doctest::Approx(std::sqrt(3.0 * dmean)).epsilon(1e-12));
  CHECK(rms.rhs == doctest::Approx(drms * std::sqrt(3.0)).epsilon(1e-12));
  CHECK(mean.lhs == doctest::Approx(distinguishability(mixture(basis, w).matrix, microcanonical(band),
                                                       MeasurementScheme(ms)))
                        .epsilon(1e-12));
  CHECK(mean.passed());
  CHECK(rms.passed());
  // Uniform weights give the floor of the bound.
  const auto [r0, m0] = check_thm1(RVector::Constant(40, 1.0 / 40), probe);
  CHECK(m0.rhs == doctest::Approx(0.0).scale(1.0));
  CHECK(m0.passed());

  // The convexity chain holds for the same weights.
  CHECK(check_convexity_chain(w, probe).passed());
}

TEST_CASE("equilibration") {
  const SpectralSystem sys = diagonal(8);
  const EnergyBand band = select_band_by_index(sys, 0, 7);
  const MeasurementSet ms = build_eigenbasis_measurements(band, sys);
  EquilibrationOptions opt;
  opt.n_times = 50;
  opt.t_max = 10.0;
  // Integer spectrum has degenerate gaps.
  CHECK(check_equilibration(sys.eigenstate(3), sys, MeasurementScheme(ms), opt).status ==
        CheckStatus::inapplicable);

  ModelSpec spec;
  spec.kind = ModelKind::explicit_diagonal;
  spec.spectrum = {0.0, 1.0, 2.7, 4.9, 8.31, 13.2};
  const SpectralSystem nd = build_hamiltonian(spec);
  const EnergyBand b6 = select_band_by_index(nd, 0, 5);
  const MeasurementSet eb = build_eigenbasis_measurements(b6, nd);
  // An eigenstate is its own time average.
  const BoundCheck c = check_equilibration(nd.eigenstate(2), nd, MeasurementScheme(eb), opt);
  CHECK(c.lhs < 1e-14);
  CHECK(c.passed());
  CHECK(c.statistical);

  // Generic GUE state, subsystem with and without substitution.
  const SpectralSystem g = gue(16, 5);
  Rng rng(3);
  const CVector psi = haar_vector(16, rng);
  const BoundCheck f = check_equilibration(psi, g, MeasurementScheme(build_random_coarse_measurements(16, 2, 2, 1)), opt);
  CHECK(f.status != CheckStatus::inapplicable);
  CHECK(f.power == 4);
  const BoundCheck s = check_equilibration(psi, g, MeasurementScheme(SubsystemPartition{2, 8}), opt);
  CHECK(s.power == 2);
  const double source_rhs = s.rhs;
  opt.subsystem_form = SubsystemEquilibration::footnote;
  CHECK(check_equilibration(psi, g, MeasurementScheme(SubsystemPartition{2, 8}), opt).rhs ==
        doctest::Approx(source_rhs / 2.0));
  opt.subsystem_form = SubsystemEquilibration::off;
  CHECK(check_equilibration(psi, g, MeasurementScheme(SubsystemPartition{2, 8}), opt).status ==
        CheckStatus::inapplicable);
}

TEST_CASE("thm2 on the eigenbasis set, d = 12") {
  const SpectralSystem sys = diagonal(12);
  const EnergyBand band = select_band_by_index(sys, 0, 11);
  const MeasurementSet ms = build_eigenbasis_measurements(band, sys);
  const BoundCheck c = check_thm2(band, sys, MeasurementScheme(ms), 4);
  CHECK(c.lhs == doctest::Approx(11.0 / 12.0).epsilon(1e-13));
  // N_M = 24, eps* = 1/4 - 1/12.
  CHECK(c.rhs == doctest::Approx(24.0 * (1.0 / 6.0)).epsilon(1e-13));
  CHECK(c.passed());
  CHECK(c.k == 4);
  CHECK_THROWS_AS(check_thm2(band, sys, MeasurementScheme(ms), 5), ValidationError);
}

TEST_CASE("thm2 on random instances") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SpectralSystem sys = gue(32, seed);
    const EnergyBand band = select_band_by_index(sys, 0, 31);
    CHECK(check_thm2(band, sys, MeasurementScheme(build_random_coarse_measurements(32, 2, 3, seed))).passed());
    CHECK(check_thm2(band, sys, MeasurementScheme(SubsystemPartition{2, 16})).passed());
  }
}

TEST_CASE("tails") {
  const SpectralSystem sys = gue(24, 9);
  const EnergyBand band = select_band_by_index(sys, 6, 17);
  const MeasurementSet ms = build_random_coarse_measurements(24, 2, 2, 2);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const CVector psi = profiled_state(sys, band, 0.02 * (t + 1), rng);
    const BoundCheck c = check_tails(DensityMatrix::pure(psi), band, sys, MeasurementScheme(ms));
    CHECK(c.passed());
  }
  // Mixture of the band's Omega with an outside eigenstate: with the full
  // state as "subsystem" (d_B = 1) the distance is exactly the outside weight.
  const double x = 0.3;
  const CMatrix mix = (1.0 - x) * microcanonical(band).matrix() + x * sys.eigenstate(0).matrix();
  const BoundCheck c =
      check_tails(DensityMatrix(mix), band, sys, MeasurementScheme(SubsystemPartition{24, 1}));
  CHECK(c.lhs == doctest::Approx(x).epsilon(1e-12));
  CHECK(c.rhs == doctest::Approx(x).epsilon(1e-12));
  CHECK(c.passed());
}

TEST_CASE("deff sandwich") {
  ModelSpec spec;
  spec.kind = ModelKind::degenerate_block;
  spec.degeneracy_profile = {3, 3, 3, 3};
  spec.seed = 4;
  const SpectralSystem sys = build_hamiltonian(spec);
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const TimeAveragedState om = time_average(DensityMatrix::pure(haar_vector(12, rng)), sys);
    CHECK(check_deff_sandwich(om, degeneracy_structure(sys)).passed());
  }
}

TEST_CASE("thm3") {
  // g = 1: D_mean,max is the plain mean and thm3 coincides with thm2.
  const SpectralSystem sys = gue(24, 3);
  const EnergyBand band = select_band_by_index(sys, 0, 23);
  const MeasurementScheme scheme(build_random_coarse_measurements(24, 2, 2, 6));
  const BoundCheck t3 = check_thm3(band, sys, scheme);
  const BoundCheck t2 = check_thm2(band, sys, scheme);
  CHECK(t3.lhs == doctest::Approx(t2.lhs).epsilon(1e-12));
  CHECK(t3.rhs == doctest::Approx(t2.rhs).epsilon(1e-12));
  CHECK(t3.passed());

  ModelSpec spec;
  spec.kind = ModelKind::degenerate_block;
  spec.degeneracy_profile = std::vector<int>(8, 2);
  spec.seed = 2;
  const SpectralSystem deg = build_hamiltonian(spec);
  const EnergyBand db = select_band_by_index(deg, 0, 15);
  CHECK(check_thm3(db, deg, MeasurementScheme(build_random_coarse_measurements(16, 2, 2, 1))).passed());
  CHECK(check_thm3(db, deg, MeasurementScheme(SubsystemPartition{2, 8})).passed());

  spec.degeneracy_profile = {4, 4};
  const SpectralSystem wide = build_hamiltonian(spec);
  const EnergyBand wb = select_band_by_index(wide, 0, 7);
  CHECK(check_thm3(wb, wide, MeasurementScheme(build_random_coarse_measurements(8, 2, 2, 1))).status ==
        CheckStatus::inapplicable);
}
