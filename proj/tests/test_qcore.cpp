#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "thermavg/qcore.hpp"
#include "thermavg/rng.hpp"

using namespace thermavg;

TEST_CASE("hermitian operator validation") {
  CMatrix m(2, 2);
  m << 1.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 2.0;
  CHECK_THROWS_AS(HermitianOperator{m}, ValidationError);
  const auto h = HermitianOperator::hermitian_part(m);
  CHECK(h.matrix()(0, 1) == cplx(0.0, 0.0));
  const auto rep = max_asymmetry(m);
  CHECK(rep.value == doctest::Approx(2.0));

  m(1, 0) = cplx(0.0, -1.0);
  CHECK_NOTHROW(HermitianOperator{m});
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS_AS(DensityMatrix(CMatrix::Identity(2, 2)), ValidationError);
  CMatrix neg(2, 2);
  neg << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, ValidationError);
  CHECK_NOTHROW(DensityMatrix(CMatrix::Identity(3, 3) / 3.0));

  CVector psi(2);
  psi << 3.0, cplx(0.0, 4.0);
  const auto rho = DensityMatrix::pure(psi);
  CHECK(rho.purity() == doctest::Approx(1.0));
  CHECK(rho.matrix().trace().real() == doctest::Approx(1.0));
  CHECK(DensityMatrix::maximally_mixed(4).purity() == doctest::Approx(0.25));
}

TEST_CASE("trace distance matches eigensolver and pure-state closed form") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const CMatrix a = testing::random_density(5, rng);
    const CMatrix b = testing::random_density(5, rng);
    CHECK(trace_distance(a, b) == doctest::Approx(testing::trace_distance_oracle(a, b)).epsilon(1e-12));
  }
  // D(psi, phi) = sqrt(1 - |<psi|phi>|^2).
  const CVector psi = haar_vector(6, rng), phi = haar_vector(6, rng);
  const double closed = std::sqrt(1.0 - std::norm(psi.dot(phi)));
  CHECK(trace_distance(DensityMatrix::pure(psi), DensityMatrix::pure(phi)) ==
        doctest::Approx(closed).epsilon(1e-12));
  CHECK(trace_distance(DensityMatrix::pure(psi), DensityMatrix::pure(psi)) == doctest::Approx(0.0));
}

TEST_CASE("partial trace") {
  Rng rng(3);
  const CMatrix rs = testing::random_density(2, rng), rb = testing::random_density(3, rng);
  const CMatrix prod = testing::kron(rs, rb);

  SubsystemPartition first{2, 3, SubsystemPosition::first};
  CHECK((partial_trace(prod, first) - rs).norm() < 1e-14);
  // S last: total = B (x) S.
  const CMatrix prod_last = testing::kron(rb, rs);
  SubsystemPartition last{2, 3, SubsystemPosition::last};
  CHECK((partial_trace(prod_last, last) - rs).norm() < 1e-14);

  const CMatrix x = testing::random_density(6, rng);
  CHECK((partial_trace(x, first) - testing::partial_trace_oracle(x, 2, 3, true)).norm() < 1e-14);
  CHECK((partial_trace(x, last) - testing::partial_trace_oracle(x, 2, 3, false)).norm() < 1e-14);

  const CVector psi = haar_vector(6, rng), phi = haar_vector(6, rng);
  for (const auto& part : {first, last}) {
    const bool f = part.position == SubsystemPosition::first;
    CHECK((reduced_pure(psi, part) -
           testing::partial_trace_oracle(psi * psi.adjoint(), 2, 3, f))
              .norm() < 1e-14);
    CHECK((reduced_cross(psi, phi, part) -
           testing::partial_trace_oracle(psi * phi.adjoint(), 2, 3, f))
              .norm() < 1e-14);
  }
  CHECK_THROWS_AS(partial_trace(x, SubsystemPartition{4, 2}), ValidationError);
}

TEST_CASE("hermitian operator basis is orthonormal") {
  for (Index d : {1, 2, 3, 4}) {
    const auto basis = hermitian_operator_basis(d);
    REQUIRE(basis.size() == static_cast<std::size_t>(d * d));
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = 0; j < basis.size(); ++j) {
        const cplx ip = (basis[i].matrix() * basis[j].matrix()).trace();
        CHECK(std::abs(ip - cplx(i == j ? 1.0 : 0.0, 0.0)) < 1e-14);
      }
  }
}

TEST_CASE("outcomes and POVMs") {
  Rng rng(5);
  const CVector v = haar_vector(4, rng);
  const CVector x = haar_vector(4, rng), y = haar_vector(4, rng);
  const Outcome p = Outcome::projector(v), c = Outcome::complement(v);
  const CMatrix pd = testing::projector(v);
  CHECK(std::abs(p.element(x, y) - x.dot(pd * y)) < 1e-14);
  CHECK(std::abs(c.element(x, y) - x.dot((CMatrix::Identity(4, 4) - pd) * y)) < 1e-14);
  CHECK(p.expectation(x) == doctest::Approx(std::norm(v.dot(x))));
  CHECK(c.trace() == doctest::Approx(3.0));

  CHECK_NOTHROW(Povm({p, c}));
  CHECK_THROWS_AS(Povm({p}), ValidationError);

  CMatrix neg = CMatrix::Identity(2, 2);
  neg(1, 1) = -1.0;
  CMatrix two = CMatrix::Identity(2, 2);
  two(1, 1) = 2.0;
  CHECK_THROWS_AS(Povm({Outcome::dense(HermitianOperator(neg)), Outcome::dense(HermitianOperator(two))}),
                  ValidationError);

  MeasurementSet ms({Povm({p, c}), Povm({p, c})});
  CHECK(ms.total_outcomes() == 4);
  CHECK(ms.outcome_offset(1) == 2);
}

TEST_CASE("eigendecomposition") {
  Rng rng(17);
  const CMatrix g = complex_gaussian_matrix(12, 12, rng);
  const HermitianOperator h = HermitianOperator::hermitian_part(g + g.adjoint());
  const SpectralSystem sys = eig_hermitian(h);
  const CMatrix& v = sys.eigenvectors();
  CHECK((v * sys.energies().cast<cplx>().asDiagonal() * v.adjoint() - h.matrix()).norm() < 1e-10);
  CHECK((v.adjoint() * v - CMatrix::Identity(12, 12)).norm() < 1e-12);
  for (Index i = 1; i < 12; ++i) CHECK(sys.energies()(i) >= sys.energies()(i - 1));
  CHECK_FALSE(sys.is_degenerate());

  // Degenerate input: classes follow the multiplicities and the basis is a
  // function of the input alone.
  RVector e(6);
  e << 0, 0, 1, 1, 1, 2;
  const CMatrix u = haar_unitary(6, rng);
  const HermitianOperator hd =
      HermitianOperator::hermitian_part(u * e.cast<cplx>().asDiagonal() * u.adjoint());
  const SpectralSystem a = eig_hermitian(hd), b = eig_hermitian(hd);
  CHECK(a.max_degeneracy() == 3);
  CHECK(a.degeneracy_classes().size() == 3);
  CHECK((a.eigenvectors() - b.eigenvectors()).norm() == 0.0);

  CHECK_THROWS_AS(SpectralSystem(h, sys.energies().reverse(), v), ValidationError);
}

TEST_CASE("group_degenerate is transitive") {
  RVector e(5);
  e << 0.0, 0.5e-9, 1.0e-9, 1.0, 2.0;
  const auto g = group_degenerate(e, 0.6e-9);
  REQUIRE(g.size() == 3);
  CHECK(g[0].size() == 3);
}
