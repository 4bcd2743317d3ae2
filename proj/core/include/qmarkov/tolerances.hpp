#pragma once

// Central tolerance table. Operations and tests share these constants so a
// single change retunes the whole stack.
namespace qmarkov::tol {

// Generic algebraic identities (products, traces, hermiticity, unitality).
inline constexpr double algebraic = 1e-12;

// Eigensolver residuals and anything downstream of a spectral decomposition.
inline constexpr double spectral = 1e-10;

// An eigenvalue counts as 1 if |lambda - 1| < mixing; a chain is mixing when
// exactly one eigenvalue counts as 1 and every other modulus is < 1 - mixing.
inline constexpr double mixing = 1e-9;

// Hypothesis checks of the perturbation machinery (<1, y>_st = 0 etc.).
inline constexpr double centering = 1e-8;

// Density-matrix eigenvalues may dip this far below zero before rejection.
inline constexpr double positivity = 1e-10;

// Model-file invariants are repaired up to this and rejected beyond it.
inline constexpr double validation = 1e-10;

}  // namespace qmarkov::tol
