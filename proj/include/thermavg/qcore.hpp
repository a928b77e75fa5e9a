#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace thermavg {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised whenever an input violates a documented invariant or precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Real part of tr(a * b) in O(n^2), without forming the product.
double trace_product(const CMatrix& a, const CMatrix& b);

// -----------------------------------------------------------------------------
// HermitianOperator

class HermitianOperator {
 public:
  /// Validates Hermiticity; the error message names the worst entry.
  explicit HermitianOperator(CMatrix entries);

  /// (m + m^dagger) / 2, for operators that are Hermitian by construction
  /// but carry rounding noise.
  static HermitianOperator hermitian_part(const CMatrix& m);

  Index dim() const { return entries_.rows(); }
  const CMatrix& matrix() const { return entries_; }

 private:
  struct Trusted {};
  HermitianOperator(CMatrix entries, Trusted) : entries_(std::move(entries)) {}

  CMatrix entries_;
};

/// Largest |m_ij - conj(m_ji)| together with its position.
struct AsymmetryReport {
  double value = 0.0;
  Index row = 0;
  Index col = 0;
};
AsymmetryReport max_asymmetry(const CMatrix& m);

// -----------------------------------------------------------------------------
// DensityMatrix

class DensityMatrix {
 public:
  /// Full validation: Hermitian, unit trace, positive semidefinite.
  explicit DensityMatrix(CMatrix entries);

  /// Skips the PSD eigenvalue check for states that are positive by
  /// construction (unitary conjugates, mixtures, dephasings). Hermitises and
  /// still checks the trace.
  static DensityMatrix trusted(const CMatrix& entries);

  /// |psi><psi| / <psi|psi>.
  static DensityMatrix pure(const CVector& psi);

  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return entries_.rows(); }
  const CMatrix& matrix() const { return entries_; }

  double purity() const;

 private:
  struct Trusted {};
  DensityMatrix(CMatrix entries, Trusted) : entries_(std::move(entries)) {}

  CMatrix entries_;
};

// -----------------------------------------------------------------------------
// Measurements

/// One POVM element. Besides dense operators, rank-one projectors |v><v| and
/// their complements I - |v><v| are stored as the vector alone, which keeps
/// eigenbasis measurement sets at O(d^2) memory instead of O(d^3).
class Outcome {
 public:
  enum class Form { dense, projector, complement };

  static Outcome dense(HermitianOperator op);
  static Outcome projector(CVector v);
  static Outcome complement(CVector v);

  Form form() const { return form_; }
  Index dim() const;

  /// Re tr(M x).
  double expectation(const CMatrix& x) const;
  /// <psi|M|psi>.
  double expectation(const CVector& psi) const;
  /// <x|M|y>.
  cplx element(const CVector& x, const CVector& y) const;
  double trace() const;

  CMatrix dense_matrix() const;
  /// Only for Form::projector / Form::complement.
  const CVector& vector() const { return vec_; }
  /// Only for Form::dense.
  const CMatrix& op() const { return op_; }

 private:
  Outcome(Form form, CMatrix op, CVector vec)
      : form_(form), op_(std::move(op)), vec_(std::move(vec)) {}

  Form form_;
  CMatrix op_;
  CVector vec_;
};

class Povm {
 public:
  /// Validates positivity of each outcome and completeness.
  explicit Povm(std::vector<Outcome> outcomes);

  std::size_t n_outcomes() const { return outcomes_.size(); }
  Index dim() const { return outcomes_.front().dim(); }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  const Outcome& operator[](std::size_t r) const { return outcomes_[r]; }

 private:
  std::vector<Outcome> outcomes_;
};

class MeasurementSet {
 public:
  MeasurementSet(std::vector<Povm> povms, std::string label = {});

  const std::vector<Povm>& povms() const { return povms_; }
  std::size_t size() const { return povms_.size(); }
  /// N_M: outcomes summed over all member POVMs.
  std::size_t total_outcomes() const { return total_outcomes_; }
  Index dim() const { return povms_.empty() ? 0 : povms_.front().dim(); }
  const std::string& label() const { return label_; }

  /// Offset of POVM m's first outcome in the flattened outcome order.
  std::size_t outcome_offset(std::size_t m) const { return offsets_[m]; }

 private:
  std::vector<Povm> povms_;
  std::vector<std::size_t> offsets_;
  std::size_t total_outcomes_ = 0;
  std::string label_;
};

// -----------------------------------------------------------------------------
// Subsystems

enum class SubsystemPosition { first, last };

struct SubsystemPartition {
  Index dim_s = 1;
  Index dim_b = 1;
  SubsystemPosition position = SubsystemPosition::first;

  Index total_dim() const { return dim_s * dim_b; }
  /// Throws unless dim_s, dim_b >= 1 and dim_s * dim_b == total.
  void validate(Index total) const;
};

// -----------------------------------------------------------------------------
// Spectral decomposition

class SpectralSystem {
 public:
  /// Validates ordering, orthonormality and reconstruction.
  SpectralSystem(HermitianOperator hamiltonian, RVector energies, CMatrix eigenvectors);

  Index dim() const { return energies_.size(); }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  const RVector& energies() const { return energies_; }
  const CMatrix& eigenvectors() const { return eigenvectors_; }
  CVector eigenvector(Index n) const { return eigenvectors_.col(n); }
  DensityMatrix eigenstate(Index n) const;

  /// Groups of indices with equal energy (within the degeneracy tolerance);
  /// contiguous because energies are sorted.
  const std::vector<std::vector<Index>>& degeneracy_classes() const { return classes_; }
  /// Size of the largest degeneracy class.
  std::size_t max_degeneracy() const;
  bool is_degenerate() const { return max_degeneracy() > 1; }
  /// Class index for every eigenstate index.
  const std::vector<std::size_t>& class_of() const { return class_of_; }

  double degeneracy_tolerance() const;

 private:
  HermitianOperator hamiltonian_;
  RVector energies_;
  CMatrix eigenvectors_;
  std::vector<std::vector<Index>> classes_;
  std::vector<std::size_t> class_of_;
};

/// Partition of sorted energies into equal-energy groups: consecutive
/// energies closer than `tol` share a class (transitively).
std::vector<std::vector<Index>> group_degenerate(const RVector& sorted_energies, double tol);

/// Dense Hermitian eigendecomposition with a canonical basis: within each
/// degeneracy class the eigenvectors are obtained by Gram-Schmidt of the
/// class projector applied to input basis vectors in index order, so the
/// output is fixed by the input (including phases).
SpectralSystem eig_hermitian(const HermitianOperator& op);

// -----------------------------------------------------------------------------
// Elementary state operations

/// (1/2) sum |lambda_i| over the spectrum of rho - sigma.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);
/// Same, on raw Hermitian matrices.
double trace_distance(const CMatrix& rho, const CMatrix& sigma);

DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemPartition& part);
/// Partial trace of an arbitrary operator, no state validation.
CMatrix partial_trace(const CMatrix& x, const SubsystemPartition& part);
/// Reduced state of a pure vector: O(dim_s^2 * dim_b).
CMatrix reduced_pure(const CVector& psi, const SubsystemPartition& part);
/// tr_B |psi><phi|.
CMatrix reduced_cross(const CVector& psi, const CVector& phi, const SubsystemPartition& part);

/// Hilbert-Schmidt orthonormal Hermitian basis of dim_s x dim_s operators
/// (generalised Gell-Mann). Element 0 is I / sqrt(dim_s); then symmetric and
/// antisymmetric off-diagonal pairs for j < k; then traceless diagonals.
std::vector<HermitianOperator> hermitian_operator_basis(Index dim_s);

}  // namespace thermavg
