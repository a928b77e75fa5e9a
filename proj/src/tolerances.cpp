#include "thermavg/tolerances.hpp"

namespace thermavg {

namespace {
Tolerances& storage() {
  static Tolerances tol;
  return tol;
}
}  // namespace

const Tolerances& tolerances() { return storage(); }

void set_tolerances(const Tolerances& tol) { storage() = tol; }

}  // namespace thermavg
