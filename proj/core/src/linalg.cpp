#include "qmarkov/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qmarkov {

namespace {
const Complex kI{0.0, 1.0};
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix raise_op() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = 1;
  return m;
}

Matrix lower_op() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

bool all_finite(const Matrix& x) { return x.allFinite(); }

bool is_hermitian(const Matrix& x, double tolerance) {
  if (x.rows() != x.cols()) return false;
  return (x - x.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

Matrix hermitize(const Matrix& x) { return 0.5 * (x + x.adjoint()); }

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

PureState::PureState(Vector amps) : amplitudes(std::move(amps)) {
  if (amplitudes.size() == 0) throw std::invalid_argument("PureState: empty amplitude vector");
  if (!amplitudes.allFinite()) throw std::invalid_argument("PureState: non-finite amplitude");
  const double norm = amplitudes.norm();
  if (std::abs(norm - 1.0) > tol::algebraic)
    throw std::invalid_argument("PureState: norm deviates from 1 by " + std::to_string(norm - 1.0));
}

PureState PureState::normalized(Vector amps) {
  const double norm = amps.norm();
  if (norm < 1e-300) throw std::invalid_argument("PureState: cannot normalize a zero vector");
  return PureState(amps / norm);
}

PureState PureState::basis_state(Index dim, Index which) {
  Vector v = Vector::Zero(dim);
  v(which) = 1.0;
  return PureState(std::move(v));
}

DensityMatrix::DensityMatrix(Matrix m) : rho(std::move(m)) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("DensityMatrix: not square");
  if (!rho.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
  if (!is_hermitian(rho)) throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > tol::algebraic || std::abs(rho.trace().imag()) > tol::algebraic)
    throw std::invalid_argument("DensityMatrix: trace != 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::positivity)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
}

DensityMatrix DensityMatrix::pure(const PureState& psi) { return DensityMatrix(psi.projector()); }

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b); }

Matrix partial_trace_atom(const Matrix& x, Index d, Index k) {
  if (x.rows() != d * k || x.cols() != d * k)
    throw std::invalid_argument("partial_trace_atom: dimension mismatch");
  Matrix out = Matrix::Zero(k, k);
  for (Index i = 0; i < d; ++i) out += x.block(i * k, i * k, k, k);
  return out;
}

Matrix conditional_expectation(const Matrix& y, const PureState& psi) {
  const Index d = psi.dim();
  if (y.rows() != y.cols() || y.rows() % d != 0)
    throw std::invalid_argument("conditional_expectation: dimension mismatch");
  const Index k = y.rows() / d;
  Matrix out = Matrix::Zero(k, k);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      out += std::conj(psi.amplitudes(i)) * psi.amplitudes(j) * y.block(i * k, j * k, k, k);
  return out;
}

Matrix expm_hermitian(const Matrix& h, double t) {
  if (!is_hermitian(h)) throw std::invalid_argument("expm_hermitian: input not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("expm_hermitian: eigensolver failed");
  Vector phases(h.rows());
  for (Index i = 0; i < h.rows(); ++i) phases(i) = std::exp(-kI * t * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_norm(const Matrix& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("trace_norm: not square");
  if (x.rows() == 0) return 0.0;
  return x.jacobiSvd().singularValues().sum();
}

std::vector<Eigenpair> eig(const Matrix& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("eig: not square");
  Eigen::ComplexEigenSolver<Matrix> es(x, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eig: eigensolver did not converge");
  std::vector<Eigenpair> pairs;
  pairs.reserve(x.rows());
  const double scale = x.norm();
  for (Index i = 0; i < x.rows(); ++i) {
    Eigenpair p;
    p.value = es.eigenvalues()(i);
    p.vector = es.eigenvectors().col(i).normalized();
    const double residual = (x * p.vector - p.value * p.vector).norm();
    if (residual > tol::spectral * std::max(1.0, scale))
      throw std::runtime_error("eig: eigenpair residual " + std::to_string(residual) +
                               " exceeds tolerance");
    pairs.push_back(std::move(p));
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return std::abs(a.value) > std::abs(b.value); });
  return pairs;
}

}  // namespace qmarkov
