#pragma once

#include <stdexcept>
#include <vector>

#include "qmarkov/superoperator.hpp"

namespace qmarkov {

/// Thrown by operations that require a unique attracting stationary state.
struct NonMixingError : std::runtime_error {
  explicit NonMixingError(const std::string& what) : std::runtime_error(what) {}
};

/// A discrete-time quantum Markov chain: d-level probes prepared in
/// input_state interact one at a time with a k-level system through the
/// unitary exp(-i theta0 H).
struct ChainModel {
  Index d = 0;
  Index k = 0;
  Matrix hamiltonian;     // (d*k) x (d*k), Hermitian
  PureState input_state;  // on C^d
  double theta0 = 0.0;

  ChainModel(Index d_, Index k_, Matrix h, PureState psi, double theta0_);

  Matrix unitary() const { return unitary_at(theta0); }
  Matrix unitary_at(double theta) const { return expm_hermitian(hamiltonian, theta); }

  ChainModel at_theta(double theta) const;

  /// Same chain with the Hamiltonian shifted to zero stationary mean,
  /// H - <H> * 1. Requires a mixing model. The unitary only changes by a
  /// global phase, so all reduced dynamics are unchanged.
  ChainModel centered() const;
};

/// Exchange-interaction example: H = i(raise (x) lower - lower (x) raise) on
/// two qubits, input a|0> + b e^{if} |1>. Requires a^2 + b^2 = 1.
ChainModel make_xy_model(double a, double b, double f, double theta0);

struct SpectralReport {
  std::vector<Complex> eigenvalues;  // decreasing modulus
  Complex lambda2{0.0, 0.0};         // second largest modulus
  double gap = 0.0;                  // 1 - |lambda2|
  bool mixing = false;
  bool degenerate_unit_eigenvalue = false;
  DensityMatrix stationary_state;
};

/// rho -> Tr_atom(U (|psi><psi| (x) rho) U^dag), as a k^2 x k^2 matrix.
SuperOperator schrodinger_map(const ChainModel& model);

/// Unital trace-pairing dual of schrodinger_map,
/// X -> <psi| U^dag (1 (x) X) U |psi>.
SuperOperator heisenberg_map(const ChainModel& model);

/// Eigenvalues of the transition map, mixing verdict, stationary state.
SpectralReport spectral_report(const ChainModel& model);

/// Stationary post-interaction expectation of an observable on the joint
/// space: Tr((|psi><psi| (x) rho_st) U^dag X U). Requires mixing.
Complex stationary_expectation(const ChainModel& model, const Matrix& x);
Complex stationary_expectation(const ChainModel& model, const Matrix& x,
                               const DensityMatrix& stationary);

/// Same, asserting the imaginary part is below tol::spectral.
double stationary_expectation_real(const ChainModel& model, const Matrix& x);

struct ConvergenceRow {
  long n;
  double distance;  // ||T_*^n(rho0) - rho_st||_1
};

struct ConvergenceDiagnostics {
  std::vector<ConvergenceRow> table;
  double fitted_rate = 0.0;     // least-squares slope of log distance vs n
  double log_lambda2 = 0.0;     // log |lambda2|, the expected asymptotic rate
};

/// Trace-norm distance to equilibrium for n = 0..n_max, with an exponential
/// rate fitted on n in [20, 100] (entries below the 1e-13 noise floor are
/// excluded from the fit). Requires mixing.
ConvergenceDiagnostics convergence_diagnostics(const ChainModel& model, const DensityMatrix& rho0,
                                               long n_max);

}  // namespace qmarkov
