#include <cmath>

#include "thermavg/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace thermavg::kernels {

PovmMax povm_max(const MeasurementSet& ms, const RVector& p, const RVector& q) {
  PovmMax best;
  bool first = true;
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const std::size_t off = ms.outcome_offset(m);
    double sum = 0.0;
    for (std::size_t r = 0; r < ms.povms()[m].n_outcomes(); ++r) {
      const auto i = static_cast<Index>(off + r);
      sum += std::abs(p(i) - q(i));
    }
    const double v = 0.5 * sum;
    if (first || v > best.value) {
      best = {v, m};
      first = false;
    }
  }
  return best;
}

MeasurementSet to_basis(const MeasurementSet& ms, const CMatrix& basis) {
  std::vector<Povm> povms;
  povms.reserve(ms.size());
  for (const auto& povm : ms.povms()) {
    std::vector<Outcome> outs;
    outs.reserve(povm.n_outcomes());
    for (const auto& o : povm.outcomes()) {
      switch (o.form()) {
        case Outcome::Form::dense:
          outs.push_back(Outcome::dense(
              HermitianOperator::hermitian_part(basis.adjoint() * o.op() * basis)));
          break;
        case Outcome::Form::projector: {
          CVector v = basis.adjoint() * o.vector();
          outs.push_back(Outcome::projector(v / v.norm()));
          break;
        }
        case Outcome::Form::complement: {
          CVector v = basis.adjoint() * o.vector();
          outs.push_back(Outcome::complement(v / v.norm()));
          break;
        }
      }
    }
    povms.emplace_back(std::move(outs));
  }
  return MeasurementSet(std::move(povms), ms.label());
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace thermavg::kernels
