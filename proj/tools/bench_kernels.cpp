// Serial reference vs OpenMP kernels. Arguments: problem dimension.

#include <benchmark/benchmark.h>

#include <map>

#include "thermavg/kernels.hpp"
#include "thermavg/models.hpp"
#include "thermavg/thermal.hpp"

using namespace thermavg;

namespace {

ModelSpec gue_spec(int dim) {
  ModelSpec spec;
  spec.kind = ModelKind::random_gue;
  spec.dim = dim;
  spec.seed = 1;
  return spec;
}

struct Fixture {
  SpectralSystem sys;
  MeasurementSet ms;
  MeasurementSet ms_energy;
  CVector coeffs;
  CMatrix rho0_e;
  CMatrix omega_e;
  CMatrix omega_s;
  SubsystemPartition part;
  RVector times;

  explicit Fixture(int dim)
      : sys(build_hamiltonian(gue_spec(dim))),
        ms(build_random_coarse_measurements(dim, 2, 4, 2)),
        ms_energy(kernels::to_basis(ms, sys.eigenvectors())),
        part{4, dim / 4} {
    Rng rng(3);
    const CVector psi = haar_vector(dim, rng);
    coeffs = sys.eigenvectors().adjoint() * psi;
    rho0_e = coeffs * coeffs.adjoint();
    omega_e = rho0_e.diagonal().asDiagonal();
    omega_s = partial_trace(sys.eigenvectors() * omega_e * sys.eigenvectors().adjoint(), part);
    times = RVector::LinSpaced(32, 0.0, 50.0);
  }
};

const Fixture& fixture(int dim) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(dim);
  if (it == cache.end()) it = cache.emplace(dim, Fixture(dim)).first;
  return it->second;
}

template <bool Parallel>
void BM_OutcomeOverlaps(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::parallel::outcome_overlaps(f.ms, f.sys.eigenvectors()));
    else
      benchmark::DoNotOptimize(kernels::serial::outcome_overlaps(f.ms, f.sys.eigenvectors()));
  }
}

template <bool Parallel>
void BM_ReducedStates(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::parallel::reduced_states(f.sys.eigenvectors(), f.part));
    else
      benchmark::DoNotOptimize(kernels::serial::reduced_states(f.sys.eigenvectors(), f.part));
  }
}

template <bool Parallel>
void BM_DistinguishabilityTrace(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::parallel::distinguishability_trace(
          f.ms_energy, f.rho0_e, f.omega_e, f.sys.energies(), f.times));
    else
      benchmark::DoNotOptimize(kernels::serial::distinguishability_trace(
          f.ms_energy, f.rho0_e, f.omega_e, f.sys.energies(), f.times));
  }
}

template <bool Parallel>
void BM_SubsystemTrace(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel)
      benchmark::DoNotOptimize(kernels::parallel::subsystem_distance_trace(
          f.sys.eigenvectors(), f.coeffs, f.sys.energies(), f.omega_s, f.part, f.times));
    else
      benchmark::DoNotOptimize(kernels::serial::subsystem_distance_trace(
          f.sys.eigenvectors(), f.coeffs, f.sys.energies(), f.omega_s, f.part, f.times));
  }
}

}  // namespace

BENCHMARK(BM_OutcomeOverlaps<false>)->Name("outcome_overlaps/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_OutcomeOverlaps<true>)->Name("outcome_overlaps/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_ReducedStates<false>)->Name("reduced_states/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_ReducedStates<true>)->Name("reduced_states/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_DistinguishabilityTrace<false>)->Name("distinguishability_trace/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_DistinguishabilityTrace<true>)->Name("distinguishability_trace/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_SubsystemTrace<false>)->Name("subsystem_trace/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_SubsystemTrace<true>)->Name("subsystem_trace/parallel")->Arg(64)->Arg(256);

BENCHMARK_MAIN();
