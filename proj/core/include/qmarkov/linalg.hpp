#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "qmarkov/tolerances.hpp"

namespace qmarkov {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Two-level operators in the computational basis {|0>, |1>}.
// raise_op() = |1><0| maps |0> to |1>; lower_op() is its adjoint.
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix raise_op();
Matrix lower_op();

bool all_finite(const Matrix& x);
bool is_hermitian(const Matrix& x, double tolerance = tol::algebraic);
Matrix hermitize(const Matrix& x);
Matrix commutator(const Matrix& a, const Matrix& b);
Matrix anticommutator(const Matrix& a, const Matrix& b);

/// Normalized state vector on C^dim.
struct PureState {
  Vector amplitudes;

  explicit PureState(Vector amps);

  /// Rescales to unit norm before constructing; throws on a zero vector.
  static PureState normalized(Vector amps);
  static PureState basis_state(Index dim, Index which);

  Index dim() const { return amplitudes.size(); }
  Matrix projector() const { return amplitudes * amplitudes.adjoint(); }
};

/// Hermitian, unit-trace, positive-semidefinite matrix.
struct DensityMatrix {
  Matrix rho;

  explicit DensityMatrix(Matrix m);
  static DensityMatrix pure(const PureState& psi);
  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return rho.rows(); }
};

// Tensor ordering is fixed as atom (x) system everywhere: an operator on
// C^d (x) C^k is indexed by (i*k + m, j*k + n) with i,j atom and m,n system
// indices. All bipartite helpers below assume this layout.

Matrix kron(const Matrix& a, const Matrix& b);

/// Trace over the atom factor: (Tr_a X)[m,n] = sum_i X[(i,m),(i,n)].
Matrix partial_trace_atom(const Matrix& x, Index d, Index k);

/// Partial inner product over the atom factor:
/// result[m,n] = sum_{i,j} conj(psi_i) Y[(i,m),(j,n)] psi_j.
Matrix conditional_expectation(const Matrix& y, const PureState& psi);

/// exp(-i t h) for Hermitian h, via eigendecomposition.
Matrix expm_hermitian(const Matrix& h, double t);

/// Sum of singular values.
double trace_norm(const Matrix& x);

struct Eigenpair {
  Complex value;
  Vector vector;  // unit norm right eigenvector
};

/// Eigenpairs of a general square matrix, sorted by decreasing |value|.
/// Residuals ||Xv - lambda v|| are checked against tol::spectral * ||X||;
/// solver failure or an excessive residual throws.
std::vector<Eigenpair> eig(const Matrix& x);

}  // namespace qmarkov
