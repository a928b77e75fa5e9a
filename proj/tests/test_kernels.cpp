#include <doctest.h>

#include "helpers.hpp"
#include "thermavg/distinguish.hpp"
#include "thermavg/kernels.hpp"
#include "thermavg/models.hpp"
#include "thermavg/thermal.hpp"

using namespace thermavg;

namespace {

SpectralSystem gue(int d, std::uint64_t seed) {
  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = d;
  spec.seed = seed;
  return build_hamiltonian(spec);
}

RVector times(int n, double t_max) {
  RVector t(n);
  for (int i = 0; i < n; ++i) t(i) = t_max * i / n;
  return t;
}

}  // namespace

TEST_CASE("serial and parallel kernels agree bit for bit") {
  const SpectralSystem sys = gue(36, 4);
  const EnergyBand band = select_band_by_index(sys, 4, 31);
  const CMatrix basis = band_basis(sys, band);
  const MeasurementSet ms = build_random_coarse_measurements(36, 3, 3, 8);
  const SubsystemPartition part{6, 6, SubsystemPosition::last};
  Rng rng(2);
  const CVector psi = haar_vector(36, rng);
  const CVector coeffs = sys.eigenvectors().adjoint() * psi;
  const CMatrix rho0 = coeffs * coeffs.adjoint();
  const CMatrix omega = time_average(DensityMatrix::pure(psi), sys).matrix.matrix();
  const CMatrix omega_e = sys.eigenvectors().adjoint() * omega * sys.eigenvectors();
  const MeasurementSet ms_e = kernels::to_basis(ms, sys.eigenvectors());
  const RVector t = times(40, 20.0);
  const CMatrix omega_s = partial_trace(omega, part);

  const int saved = kernels::max_threads();
  for (int threads : {1, 2, 4}) {
    kernels::set_threads(threads);
    CHECK(kernels::serial::outcome_overlaps(ms, basis) == kernels::parallel::outcome_overlaps(ms, basis));
    const auto rs = kernels::serial::reduced_states(basis, part);
    const auto rp = kernels::parallel::reduced_states(basis, part);
    REQUIRE(rs.size() == rp.size());
    for (std::size_t i = 0; i < rs.size(); ++i) CHECK(rs[i] == rp[i]);
    CHECK(kernels::serial::trace_distances_to(rs, omega_s) ==
          kernels::parallel::trace_distances_to(rp, omega_s));
    CHECK(kernels::serial::distinguishability_trace(ms_e, rho0, omega_e, sys.energies(), t) ==
          kernels::parallel::distinguishability_trace(ms_e, rho0, omega_e, sys.energies(), t));
    CHECK(kernels::serial::subsystem_distance_trace(sys.eigenvectors(), coeffs, sys.energies(), omega_s,
                                                    part, t) ==
          kernels::parallel::subsystem_distance_trace(sys.eigenvectors(), coeffs, sys.energies(),
                                                      omega_s, part, t));
  }
  kernels::set_threads(saved);
}

TEST_CASE("trace kernels match direct evolution") {
  const SpectralSystem sys = gue(12, 6);
  const MeasurementSet ms = build_random_coarse_measurements(12, 2, 3, 3);
  const SubsystemPartition part{3, 4};
  Rng rng(5);
  const CVector psi = haar_vector(12, rng);
  const CVector coeffs = sys.eigenvectors().adjoint() * psi;
  const DensityMatrix omega = time_average(DensityMatrix::pure(psi), sys).matrix;
  const CMatrix omega_e = sys.eigenvectors().adjoint() * omega.matrix() * sys.eigenvectors();
  const RVector t = times(7, 3.0);

  const RVector dm = kernels::serial::distinguishability_trace(
      kernels::to_basis(ms, sys.eigenvectors()), coeffs * coeffs.adjoint(), omega_e, sys.energies(), t);
  const RVector ds = kernels::serial::subsystem_distance_trace(sys.eigenvectors(), coeffs, sys.energies(),
                                                               partial_trace(omega.matrix(), part), part, t);
  for (Index i = 0; i < t.size(); ++i) {
    const DensityMatrix rt = DensityMatrix::pure(evolve(psi, sys, t(i)));
    CHECK(dm(i) == doctest::Approx(dist_set(rt, omega, ms).value).epsilon(1e-11));
    CHECK(ds(i) == doctest::Approx(testing::trace_distance_oracle(
                                       testing::partial_trace_oracle(rt.matrix(), 3, 4, true),
                                       testing::partial_trace_oracle(omega.matrix(), 3, 4, true)))
                       .epsilon(1e-11));
  }
}

TEST_CASE("overlaps and povm_max") {
  const SpectralSystem sys = gue(10, 1);
  const MeasurementSet ms = build_random_coarse_measurements(10, 3, 2, 9);
  const RMatrix q = kernels::serial::outcome_overlaps(ms, sys.eigenvectors());
  for (Index n = 0; n < 10; ++n) {
    const CVector v = sys.eigenvector(n);
    std::size_t r = 0;
    for (const auto& p : ms.povms())
      for (const auto& o : p.outcomes()) {
        CHECK(q(static_cast<Index>(r), n) == doctest::Approx(v.dot(o.dense_matrix() * v).real()).epsilon(1e-12));
        ++r;
      }
  }
  RVector p = q.col(0), r = q.col(1);
  const auto best = kernels::povm_max(ms, p, r);
  double manual = 0.0;
  for (std::size_t m = 0; m < ms.size(); ++m) {
    double s = 0.0;
    for (std::size_t j = 0; j < ms.povms()[m].n_outcomes(); ++j) {
      const Index row = static_cast<Index>(ms.outcome_offset(m) + j);
      s += std::abs(p(row) - r(row));
    }
    manual = std::max(manual, 0.5 * s);
  }
  CHECK(best.value == doctest::Approx(manual).epsilon(1e-14));
}
