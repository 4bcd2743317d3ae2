#include "qmarkov/superoperator.hpp"

#include <stdexcept>

namespace qmarkov {

Vector vec(const Matrix& x) {
  return Eigen::Map<const Vector>(x.data(), x.size());
}

Matrix unvec(const Vector& v, Index k) {
  if (v.size() != k * k) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), k, k);
}

SuperOperator::SuperOperator(Index k_, Matrix m) : k(k_), mat(std::move(m)) {
  if (mat.rows() != k * k || mat.cols() != k * k)
    throw std::invalid_argument("SuperOperator: matrix must be k^2 x k^2");
}

SuperOperator SuperOperator::identity(Index k) {
  return {k, Matrix::Identity(k * k, k * k)};
}

SuperOperator SuperOperator::zero(Index k) {
  return {k, Matrix::Zero(k * k, k * k)};
}

SuperOperator SuperOperator::from_action(Index k, const std::function<Matrix(const Matrix&)>& action) {
  Matrix m(k * k, k * k);
  Matrix basis = Matrix::Zero(k, k);
  for (Index n = 0; n < k; ++n) {
    for (Index mm = 0; mm < k; ++mm) {
      basis(mm, n) = 1.0;
      m.col(mm + n * k) = vec(action(basis));
      basis(mm, n) = 0.0;
    }
  }
  return {k, std::move(m)};
}

Matrix SuperOperator::apply(const Matrix& x) const {
  if (x.rows() != k || x.cols() != k) throw std::invalid_argument("SuperOperator::apply: dimension mismatch");
  return unvec(mat * vec(x), k);
}

Matrix SuperOperator::iterate_on_identity(long n) const {
  Vector w = vec(Matrix::Identity(k, k));
  for (long i = 0; i < n; ++i) w = mat * w;
  return unvec(w, k);
}

SuperOperator SuperOperator::hs_adjoint() const { return {k, mat.adjoint()}; }

bool SuperOperator::is_unital(double tolerance) const {
  return (apply(Matrix::Identity(k, k)) - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= tolerance;
}

SuperOperator operator+(const SuperOperator& a, const SuperOperator& b) {
  if (a.k != b.k) throw std::invalid_argument("SuperOperator: dimension mismatch");
  return {a.k, a.mat + b.mat};
}

SuperOperator operator-(const SuperOperator& a, const SuperOperator& b) {
  if (a.k != b.k) throw std::invalid_argument("SuperOperator: dimension mismatch");
  return {a.k, a.mat - b.mat};
}

SuperOperator operator*(Complex c, const SuperOperator& s) { return {s.k, c * s.mat}; }

SuperOperator compose(const SuperOperator& s, const SuperOperator& t) {
  if (s.k != t.k) throw std::invalid_argument("compose: dimension mismatch");
  return {s.k, s.mat * t.mat};
}

}  // namespace qmarkov
