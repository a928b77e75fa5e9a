#include "thermavg/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "thermavg/tolerances.hpp"

namespace thermavg {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

double hermiticity_scale(const CMatrix& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

void require_hermitian(const CMatrix& m, const char* what) {
  const auto asym = max_asymmetry(m);
  if (asym.value > tolerances().hermiticity * hermiticity_scale(m)) {
    std::ostringstream os;
    os << what << ": not Hermitian, max asymmetry " << asym.value << " at (" << asym.row << ","
       << asym.col << ")";
    throw ValidationError(os.str());
  }
}

double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double spectral_norm_hermitian(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double trace_product(const CMatrix& a, const CMatrix& b) {
  // tr(ab) = sum_ij a_ij b_ji
  return a.cwiseProduct(b.transpose()).sum().real();
}

AsymmetryReport max_asymmetry(const CMatrix& m) {
  AsymmetryReport rep;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = std::abs(m(i, j) - std::conj(m(j, i)));
      if (v > rep.value) rep = {v, i, j};
    }
  }
  return rep;
}

// -----------------------------------------------------------------------------

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
  require_square(entries_, "HermitianOperator");
  require_hermitian(entries_, "HermitianOperator");
}

HermitianOperator HermitianOperator::hermitian_part(const CMatrix& m) {
  require_square(m, "HermitianOperator");
  CMatrix h = 0.5 * (m + m.adjoint());
  return HermitianOperator(std::move(h), Trusted{});
}

// -----------------------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix entries) : entries_(std::move(entries)) {
  require_square(entries_, "DensityMatrix");
  require_hermitian(entries_, "DensityMatrix");
  const double tr = entries_.trace().real();
  if (std::abs(tr - 1.0) > tolerances().trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " differs from 1";
    throw ValidationError(os.str());
  }
  const double lo = min_eigenvalue(entries_);
  if (lo < -tolerances().psd) {
    std::ostringstream os;
    os << "DensityMatrix: negative eigenvalue " << lo;
    throw ValidationError(os.str());
  }
}

DensityMatrix DensityMatrix::trusted(const CMatrix& entries) {
  require_square(entries, "DensityMatrix");
  CMatrix h = 0.5 * (entries + entries.adjoint());
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > tolerances().trace) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " differs from 1";
    throw ValidationError(os.str());
  }
  return DensityMatrix(std::move(h), Trusted{});
}

DensityMatrix DensityMatrix::pure(const CVector& psi) {
  const double nrm = psi.norm();
  if (psi.size() < 1 || !(nrm > 0.0)) throw ValidationError("DensityMatrix::pure: zero vector");
  const CVector u = psi / nrm;
  return DensityMatrix(u * u.adjoint(), Trusted{});
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  if (dim < 1) throw ValidationError("DensityMatrix::maximally_mixed: dim < 1");
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim), Trusted{});
}

double DensityMatrix::purity() const { return trace_product(entries_, entries_); }

// -----------------------------------------------------------------------------

Outcome Outcome::dense(HermitianOperator op) {
  return Outcome(Form::dense, op.matrix(), CVector());
}

Outcome Outcome::projector(CVector v) {
  if (std::abs(v.norm() - 1.0) > tolerances().povm_sum)
    throw ValidationError("Outcome::projector: vector is not normalised");
  return Outcome(Form::projector, CMatrix(), std::move(v));
}

Outcome Outcome::complement(CVector v) {
  if (std::abs(v.norm() - 1.0) > tolerances().povm_sum)
    throw ValidationError("Outcome::complement: vector is not normalised");
  return Outcome(Form::complement, CMatrix(), std::move(v));
}

Index Outcome::dim() const { return form_ == Form::dense ? op_.rows() : vec_.size(); }

double Outcome::expectation(const CMatrix& x) const {
  switch (form_) {
    case Form::dense:
      return trace_product(op_, x);
    case Form::projector:
      return vec_.dot(x * vec_).real();
    case Form::complement:
      return x.trace().real() - vec_.dot(x * vec_).real();
  }
  return 0.0;
}

double Outcome::expectation(const CVector& psi) const {
  switch (form_) {
    case Form::dense:
      return psi.dot(op_ * psi).real();
    case Form::projector:
      return std::norm(vec_.dot(psi));
    case Form::complement:
      return psi.squaredNorm() - std::norm(vec_.dot(psi));
  }
  return 0.0;
}

cplx Outcome::element(const CVector& x, const CVector& y) const {
  switch (form_) {
    case Form::dense:
      return x.dot(op_ * y);
    case Form::projector:
      return x.dot(vec_) * vec_.dot(y);
    case Form::complement:
      return x.dot(y) - x.dot(vec_) * vec_.dot(y);
  }
  return 0.0;
}

double Outcome::trace() const {
  switch (form_) {
    case Form::dense:
      return op_.trace().real();
    case Form::projector:
      return 1.0;
    case Form::complement:
      return static_cast<double>(vec_.size()) - 1.0;
  }
  return 0.0;
}

CMatrix Outcome::dense_matrix() const {
  switch (form_) {
    case Form::dense:
      return op_;
    case Form::projector:
      return vec_ * vec_.adjoint();
    case Form::complement:
      return CMatrix::Identity(vec_.size(), vec_.size()) - vec_ * vec_.adjoint();
  }
  return {};
}

// -----------------------------------------------------------------------------

Povm::Povm(std::vector<Outcome> outcomes) : outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw ValidationError("Povm: no outcomes");
  const Index d = outcomes_.front().dim();
  for (const auto& o : outcomes_)
    if (o.dim() != d) throw ValidationError("Povm: outcome dimensions differ");

  // {|v><v|, I - |v><v|} with the same v is complete by construction.
  if (outcomes_.size() == 2 && outcomes_[0].form() == Outcome::Form::projector &&
      outcomes_[1].form() == Outcome::Form::complement &&
      (outcomes_[0].vector() - outcomes_[1].vector()).norm() == 0.0)
    return;

  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t r = 0; r < outcomes_.size(); ++r) {
    const auto& o = outcomes_[r];
    if (o.form() == Outcome::Form::dense) {
      const double lo = min_eigenvalue(o.op());
      if (lo < -tolerances().psd) {
        std::ostringstream os;
        os << "Povm: outcome " << r << " has negative eigenvalue " << lo;
        throw ValidationError(os.str());
      }
    }
    sum += o.dense_matrix();
  }
  const double err = (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (err > tolerances().povm_sum) {
    std::ostringstream os;
    os << "Povm: outcomes sum to identity only within " << err;
    throw ValidationError(os.str());
  }
}

MeasurementSet::MeasurementSet(std::vector<Povm> povms, std::string label)
    : povms_(std::move(povms)), label_(std::move(label)) {
  offsets_.reserve(povms_.size());
  for (const auto& p : povms_) {
    if (p.dim() != povms_.front().dim())
      throw ValidationError("MeasurementSet: POVM dimensions differ");
    offsets_.push_back(total_outcomes_);
    total_outcomes_ += p.n_outcomes();
  }
}

// -----------------------------------------------------------------------------

void SubsystemPartition::validate(Index total) const {
  if (dim_s < 1 || dim_b < 1) throw ValidationError("SubsystemPartition: dimensions must be >= 1");
  if (dim_s * dim_b != total) {
    std::ostringstream os;
    os << "SubsystemPartition: " << dim_s << " x " << dim_b << " does not match dimension "
       << total;
    throw ValidationError(os.str());
  }
}

// -----------------------------------------------------------------------------

std::vector<std::vector<Index>> group_degenerate(const RVector& e, double tol) {
  std::vector<std::vector<Index>> groups;
  for (Index i = 0; i < e.size(); ++i) {
    if (i == 0 || e(i) - e(i - 1) > tol)
      groups.emplace_back();
    groups.back().push_back(i);
  }
  return groups;
}

SpectralSystem::SpectralSystem(HermitianOperator hamiltonian, RVector energies,
                               CMatrix eigenvectors)
    : hamiltonian_(std::move(hamiltonian)),
      energies_(std::move(energies)),
      eigenvectors_(std::move(eigenvectors)) {
  const Index d = hamiltonian_.dim();
  if (energies_.size() != d || eigenvectors_.rows() != d || eigenvectors_.cols() != d)
    throw ValidationError("SpectralSystem: inconsistent dimensions");
  for (Index i = 1; i < d; ++i)
    if (energies_(i) < energies_(i - 1))
      throw ValidationError("SpectralSystem: energies not sorted ascending");

  const double gram_err =
      (eigenvectors_.adjoint() * eigenvectors_ - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
  if (gram_err > tolerances().gram) {
    std::ostringstream os;
    os << "SpectralSystem: eigenvectors not orthonormal (Gram error " << gram_err << ")";
    throw ValidationError(os.str());
  }

  const CMatrix diff = eigenvectors_ * energies_.cast<cplx>().asDiagonal() *
                           eigenvectors_.adjoint() -
                       hamiltonian_.matrix();
  // Frobenius norm bounds the spectral norm from above; only fall back to the
  // exact value when the cheap bound is inconclusive.
  double err = diff.norm();
  if (err > tolerances().reconstruction) err = spectral_norm_hermitian(0.5 * (diff + diff.adjoint()));
  if (err > tolerances().reconstruction) {
    std::ostringstream os;
    os << "SpectralSystem: reconstruction error " << err;
    throw ValidationError(os.str());
  }

  classes_ = group_degenerate(energies_, degeneracy_tolerance());
  class_of_.assign(static_cast<std::size_t>(d), 0);
  for (std::size_t c = 0; c < classes_.size(); ++c)
    for (Index i : classes_[c]) class_of_[static_cast<std::size_t>(i)] = c;
}

double SpectralSystem::degeneracy_tolerance() const {
  const double range = energies_.size() > 0 ? energies_.maxCoeff() - energies_.minCoeff() : 0.0;
  return tolerances().degeneracy * std::max(1.0, range);
}

DensityMatrix SpectralSystem::eigenstate(Index n) const {
  return DensityMatrix::pure(eigenvectors_.col(n));
}

std::size_t SpectralSystem::max_degeneracy() const {
  std::size_t g = 0;
  for (const auto& c : classes_) g = std::max(g, c.size());
  return g;
}

SpectralSystem eig_hermitian(const HermitianOperator& op) {
  const Index d = op.dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
  if (es.info() != Eigen::Success) throw ValidationError("eig_hermitian: solver did not converge");
  const RVector& energies = es.eigenvalues();
  const CMatrix& raw = es.eigenvectors();

  const double range = d > 0 ? energies(d - 1) - energies(0) : 0.0;
  const double tol = tolerances().degeneracy * std::max(1.0, range);
  const auto groups = group_degenerate(energies, tol);

  // Canonical basis per class: Gram-Schmidt of P e_0, P e_1, ... carried out
  // in the class's own coordinates (P e_i = C y_i with y_i = C^dagger e_i).
  constexpr double accept = 1e-3;
  CMatrix vectors(d, d);
  for (const auto& g : groups) {
    const Index k = static_cast<Index>(g.size());
    const CMatrix block = raw.middleCols(g.front(), k);
    CMatrix accepted(k, k);
    Index found = 0;
    for (Index i = 0; i < d && found < k; ++i) {
      CVector y = block.row(i).adjoint();
      for (int pass = 0; pass < 2; ++pass)
        for (Index j = 0; j < found; ++j) y -= accepted.col(j) * accepted.col(j).dot(y);
      const double nrm = y.norm();
      if (nrm >= accept) accepted.col(found++) = y / nrm;
    }
    if (found < k) throw ValidationError("eig_hermitian: failed to canonicalise eigenspace");
    vectors.middleCols(g.front(), k) = block * accepted;
  }

  return SpectralSystem(op, energies, std::move(vectors));
}

// -----------------------------------------------------------------------------

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols())
    throw ValidationError("trace_distance: dimension mismatch");
  const CMatrix diff = rho - sigma;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  const double td = 0.5 * es.eigenvalues().cwiseAbs().sum();
  return std::clamp(td, 0.0, 1.0);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return trace_distance(rho.matrix(), sigma.matrix());
}

CMatrix partial_trace(const CMatrix& x, const SubsystemPartition& part) {
  part.validate(x.rows());
  const Index ds = part.dim_s, db = part.dim_b;
  CMatrix out = CMatrix::Zero(ds, ds);
  for (Index s = 0; s < ds; ++s) {
    for (Index t = 0; t < ds; ++t) {
      cplx acc = 0.0;
      for (Index b = 0; b < db; ++b) {
        if (part.position == SubsystemPosition::first)
          acc += x(s * db + b, t * db + b);
        else
          acc += x(b * ds + s, b * ds + t);
      }
      out(s, t) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const SubsystemPartition& part) {
  return DensityMatrix::trusted(partial_trace(rho.matrix(), part));
}

CMatrix reduced_cross(const CVector& psi, const CVector& phi, const SubsystemPartition& part) {
  part.validate(psi.size());
  part.validate(phi.size());
  if (part.position == SubsystemPosition::first) {
    // psi(s * db + b) -> column-major (db x ds) matrix M(b, s)
    Eigen::Map<const CMatrix> mp(psi.data(), part.dim_b, part.dim_s);
    Eigen::Map<const CMatrix> mq(phi.data(), part.dim_b, part.dim_s);
    return (mq.adjoint() * mp).transpose();
  }
  Eigen::Map<const CMatrix> mp(psi.data(), part.dim_s, part.dim_b);
  Eigen::Map<const CMatrix> mq(phi.data(), part.dim_s, part.dim_b);
  return mp * mq.adjoint();
}

CMatrix reduced_pure(const CVector& psi, const SubsystemPartition& part) {
  return reduced_cross(psi, psi, part);
}

std::vector<HermitianOperator> hermitian_operator_basis(Index dim_s) {
  if (dim_s < 1) throw ValidationError("hermitian_operator_basis: dim_s must be >= 1");
  const Index d = dim_s;
  std::vector<HermitianOperator> basis;
  basis.reserve(static_cast<std::size_t>(d * d));

  basis.push_back(HermitianOperator::hermitian_part(CMatrix::Identity(d, d) / std::sqrt(double(d))));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < d; ++j) {
    for (Index k = j + 1; k < d; ++k) {
      CMatrix sym = CMatrix::Zero(d, d);
      sym(j, k) = sym(k, j) = inv_sqrt2;
      basis.push_back(HermitianOperator::hermitian_part(sym));
      CMatrix anti = CMatrix::Zero(d, d);
      anti(j, k) = cplx(0.0, -inv_sqrt2);
      anti(k, j) = cplx(0.0, inv_sqrt2);
      basis.push_back(HermitianOperator::hermitian_part(anti));
    }
  }
  // Traceless diagonals: diag(1, ..., 1, -l, 0, ...) / sqrt(l (l + 1)).
  for (Index l = 1; l < d; ++l) {
    CMatrix diag = CMatrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(double(l) * double(l + 1));
    for (Index i = 0; i < l; ++i) diag(i, i) = norm;
    diag(l, l) = -double(l) * norm;
    basis.push_back(HermitianOperator::hermitian_part(diag));
  }
  return basis;
}

}  // namespace thermavg
