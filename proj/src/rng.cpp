#include "thermavg/rng.hpp"

#include <cmath>
#include <complex>

namespace thermavg {

namespace {
std::complex<double> complex_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}
}  // namespace

Eigen::VectorXcd complex_gaussian_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal(rng);
  return v;
}

Eigen::MatrixXcd complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXcd m(rows, cols);
  // Column-major fill order fixes the draw sequence.
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_normal(rng);
  return m;
}

Eigen::VectorXcd haar_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd v = complex_gaussian_vector(n, rng);
  return v / v.norm();
}

Eigen::MatrixXcd haar_unitary(Eigen::Index n, Rng& rng) {
  const Eigen::MatrixXcd g = complex_gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double a = std::abs(r(j, j));
    if (a > 0.0) q.col(j) *= r(j, j) / a;
  }
  return q;
}

}  // namespace thermavg
