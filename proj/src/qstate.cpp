#include "qstate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace qst {

int dimension(int qubits) {
  if (qubits < 1)
    fail(Error::Code::invalid_argument,
         "qubit count must be at least 1, got " + std::to_string(qubits));
  if (qubits > kMaxQubits)
    fail(Error::Code::invalid_argument,
         "qubit count " + std::to_string(qubits) + " exceeds the cap of " +
             std::to_string(kMaxQubits));
  return 1 << qubits;
}

int qubits_from_tau_size(Eigen::Index size) {
  for (int d = 1; d <= kMaxQubits; ++d) {
    const Eigen::Index expected = Eigen::Index(1) << (2 * d);
    if (size == expected) return d;
    if (size < expected) break;
  }
  fail(Error::Code::invalid_argument,
       "tau length " + std::to_string(size) + " is not 4^d for d in range");
}

namespace {

void require_same_dimension(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.qubits != b.qubits || a.matrix.rows() != b.matrix.rows())
    fail(Error::Code::dimension_mismatch,
         "density matrices have different dimensions (" +
             std::to_string(a.matrix.rows()) + " vs " +
             std::to_string(b.matrix.rows()) + ")");
}

void require_consistent(const DensityMatrix& rho) {
  const int dim = dimension(rho.qubits);
  if (rho.matrix.rows() != dim || rho.matrix.cols() != dim)
    fail(Error::Code::dimension_mismatch,
         "density matrix shape does not match its qubit count");
}

}  // namespace

PureState haar_random_pure(int qubits, Rng& rng) {
  const int dim = dimension(qubits);
  CVector amps(dim);
  for (int i = 0; i < dim; ++i) amps(i) = Complex(rng.normal(), rng.normal());
  amps /= amps.norm();
  return PureState{qubits, std::move(amps)};
}

DensityMatrix to_density(const PureState& psi) {
  const int dim = dimension(psi.qubits);
  if (psi.amplitudes.size() != dim)
    fail(Error::Code::dimension_mismatch,
         "amplitude vector length does not match qubit count");
  if (std::abs(psi.amplitudes.squaredNorm() - 1.0) > 1e-9)
    fail(Error::Code::invalid_argument, "pure state is not normalized");
  return DensityMatrix{psi.qubits,
                       psi.amplitudes * psi.amplitudes.adjoint()};
}

CMatrix tau_to_factor(const TauVector& tau) {
  const int dim = dimension(tau.qubits);
  if (tau.values.size() != Eigen::Index(dim) * dim)
    fail(Error::Code::dimension_mismatch,
         "tau length does not match its qubit count");
  CMatrix factor = CMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) factor(i, i) = tau.values(i);
  Eigen::Index k = dim;
  for (int r = 1; r < dim; ++r)
    for (int c = 0; c < r; ++c) {
      factor(r, c) = Complex(tau.values(k), tau.values(k + 1));
      k += 2;
    }
  return factor;
}

TauVector factor_to_tau(const CMatrix& factor, int qubits) {
  const int dim = dimension(qubits);
  RVector values(Eigen::Index(dim) * dim);
  for (int i = 0; i < dim; ++i) values(i) = factor(i, i).real();
  Eigen::Index k = dim;
  for (int r = 1; r < dim; ++r)
    for (int c = 0; c < r; ++c) {
      values(k) = factor(r, c).real();
      values(k + 1) = factor(r, c).imag();
      k += 2;
    }
  return TauVector{qubits, std::move(values)};
}

TauVector tau_from_density(const DensityMatrix& rho, double epsilon) {
  require_consistent(rho);
  if (epsilon < 0.0 || epsilon > 1e-3)
    fail(Error::Code::invalid_argument,
         "cholesky regularization must lie in [0, 1e-3]");
  const int dim = dimension(rho.qubits);
  CMatrix blended = (1.0 - epsilon) * rho.matrix +
                    (epsilon / dim) * CMatrix::Identity(dim, dim);

  // rho' = T^dag T with T lower triangular is the Cholesky factorization of
  // the index-reversed matrix: with J the exchange permutation and
  // J rho' J = L L^dag, T = J L^dag J.
  CMatrix reversed(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      reversed(r, c) = blended(dim - 1 - r, dim - 1 - c);
  Eigen::LLT<CMatrix> llt(reversed);
  if (llt.info() != Eigen::Success)
    fail(Error::Code::numeric,
         "cholesky decomposition failed: matrix is not positive definite "
         "after regularization");
  const CMatrix lower = llt.matrixL();
  CMatrix factor(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      factor(r, c) = std::conj(lower(dim - 1 - c, dim - 1 - r));

  TauVector tau = factor_to_tau(factor, rho.qubits);
  tau.values /= tau.values.norm();  // canonical: unit sum of squares
  return tau;
}

DensityMatrix density_from_tau(const TauVector& tau) {
  const CMatrix factor = tau_to_factor(tau);
  const CMatrix gram = factor.adjoint() * factor;
  const double trace = gram.trace().real();
  if (!(trace > 0.0))
    fail(Error::Code::invalid_argument,
         "degenerate parameter vector: tau has zero norm");
  return DensityMatrix{tau.qubits, gram / trace};
}

CMatrix matrix_sqrt_psd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    fail(Error::Code::numeric, "eigendecomposition failed");
  RVector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() *
         solver.eigenvectors().adjoint();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_consistent(rho);
  require_same_dimension(rho, sigma);
  // (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 = (Tr |sqrt(rho) sqrt(sigma)|)^2;
  // the trace-norm form is symmetric to machine precision.
  const CMatrix product =
      matrix_sqrt_psd(rho.matrix) * matrix_sqrt_psd(sigma.matrix);
  Eigen::JacobiSVD<CMatrix> svd(product);
  const double trace_norm = svd.singularValues().sum();
  return std::clamp(trace_norm * trace_norm, 0.0, 1.0);
}

double purity(const DensityMatrix& rho) {
  require_consistent(rho);
  // Tr(rho^2) equals the squared Frobenius norm for Hermitian rho.
  return rho.matrix.squaredNorm();
}

void check_density(const DensityMatrix& rho, double hermitian_tol,
                   double trace_tol, double eigenvalue_floor) {
  require_consistent(rho);
  const double herm_dev =
      (rho.matrix - rho.matrix.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > hermitian_tol)
    fail(Error::Code::numeric,
         "density matrix is not Hermitian (deviation " +
             std::to_string(herm_dev) + ")");
  const double trace_dev = std::abs(rho.matrix.trace().real() - 1.0);
  if (trace_dev > trace_tol)
    fail(Error::Code::numeric,
         "density matrix trace deviates from 1 by " +
             std::to_string(trace_dev));
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.matrix);
  if (solver.info() != Eigen::Success)
    fail(Error::Code::numeric, "eigendecomposition failed");
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < eigenvalue_floor)
    fail(Error::Code::numeric,
         "density matrix has negative eigenvalue " + std::to_string(min_eig));
}

}  // namespace qst
