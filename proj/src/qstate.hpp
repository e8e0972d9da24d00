#pragma once

#include <complex>

#include <Eigen/Dense>

#include "error.hpp"
#include "rng.hpp"

namespace qst {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// Qubit counts 1..4 are the benchmarked range; larger values work but get
// expensive fast. The hard cap only guards allocations.
inline constexpr int kMaxQubits = 10;

// Blend weight used to keep the Cholesky factorization of (near-)pure states
// strictly positive definite. Costs < 1e-6 fidelity on the round trip.
inline constexpr double kDefaultCholeskyEpsilon = 1e-7;

// 2^qubits, validating the qubit count.
int dimension(int qubits);

// Recovers d from a tau length of 4^d; rejects lengths that are not a power
// of four in range.
int qubits_from_tau_size(Eigen::Index size);

// Unit-norm state vector of 2^d amplitudes.
struct PureState {
  int qubits = 0;
  CVector amplitudes;
};

// Hermitian, unit-trace, positive-semidefinite 2^d x 2^d matrix.
struct DensityMatrix {
  int qubits = 0;
  CMatrix matrix;
};

// Flattened lower-triangular factor T with rho = T^dag T / Tr(T^dag T).
// Layout: the 2^d real diagonal entries of T in row order, then for each
// strictly-lower entry T(r,c), r > c, in row-major order the pair (Re, Im).
struct TauVector {
  int qubits = 0;
  RVector values;  // length 4^d
};

// Haar-distributed pure state: 2^d independent standard complex Gaussians,
// normalized.
PureState haar_random_pure(int qubits, Rng& rng);

// Outer product |psi><psi|.
DensityMatrix to_density(const PureState& psi);

// Factors (1-eps) rho + eps I/2^d = T^dag T with T lower triangular and
// nonnegative real diagonal, then flattens T. The output is canonical: unit
// sum of squares, diagonal slots >= 0.
TauVector tau_from_density(const DensityMatrix& rho,
                           double epsilon = kDefaultCholeskyEpsilon);

// Rebuilds T and returns T^dag T / Tr(T^dag T). Total on every nonzero tau:
// the result satisfies all DensityMatrix invariants by construction.
DensityMatrix density_from_tau(const TauVector& tau);

// Uhlmann fidelity, squared convention: (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Tr(rho^2).
double purity(const DensityMatrix& rho);

// Layout helpers shared with the estimators.
CMatrix tau_to_factor(const TauVector& tau);
TauVector factor_to_tau(const CMatrix& factor, int qubits);

// Principal square root of a Hermitian PSD matrix via eigendecomposition;
// eigenvalues below zero (roundoff) are clamped.
CMatrix matrix_sqrt_psd(const CMatrix& m);

// Throws Error::Code::numeric if the DensityMatrix invariants fail.
void check_density(const DensityMatrix& rho, double hermitian_tol = 1e-10,
                   double trace_tol = 1e-10, double eigenvalue_floor = -1e-10);

}  // namespace qst
