#pragma once

#include <functional>

#include "qmarkov/linalg.hpp"

namespace qmarkov {

// Vectorization convention: column stacking, vec(X)(m + n*k) = X(m, n).
// Every superoperator in this library stores its matrix in this convention,
// so mat * vec(X) = vec(T(X)) and vec(A X B) = (B^T (x) A) vec(X).
Vector vec(const Matrix& x);
Matrix unvec(const Vector& v, Index k);

/// Linear map on k x k operators, stored as a k^2 x k^2 matrix.
struct SuperOperator {
  Index k = 0;
  Matrix mat;

  SuperOperator() = default;
  SuperOperator(Index k_, Matrix m);

  static SuperOperator identity(Index k);
  static SuperOperator zero(Index k);

  /// Builds the matrix column by column from the action on basis units E_mn.
  static SuperOperator from_action(Index k, const std::function<Matrix(const Matrix&)>& action);

  Matrix apply(const Matrix& x) const;

  /// T^n[1] by repeated application to the identity.
  Matrix iterate_on_identity(long n) const;

  /// Adjoint w.r.t. the Hilbert-Schmidt pairing <A,B> = Tr(A^dag B). Maps a
  /// Heisenberg-picture operator to its Schrodinger-picture dual and back.
  SuperOperator hs_adjoint() const;

  bool is_unital(double tolerance = tol::algebraic) const;
};

SuperOperator operator+(const SuperOperator& a, const SuperOperator& b);
SuperOperator operator-(const SuperOperator& a, const SuperOperator& b);
SuperOperator operator*(Complex c, const SuperOperator& s);

/// Composition s after t.
SuperOperator compose(const SuperOperator& s, const SuperOperator& t);

}  // namespace qmarkov
