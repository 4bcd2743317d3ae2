#include "qmarkov/chain.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace qmarkov {

namespace {

const Complex kI{0.0, 1.0};

// Hermitize, clip negative eigenvalues, renormalize. Eigensolver output is
// only a fixed point up to roundoff, so the raw eigenvector needs repair
// before it can carry a DensityMatrix invariant.
DensityMatrix repair_state(const Matrix& raw) {
  Matrix h = hermitize(raw);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  const double total = vals.sum();
  if (total < 1e-14) throw std::runtime_error("stationary state extraction: zero-trace fixed point");
  vals /= total;
  Matrix rho = es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint();
  return DensityMatrix(hermitize(rho));
}

}  // namespace

ChainModel::ChainModel(Index d_, Index k_, Matrix h, PureState psi, double theta0_)
    : d(d_), k(k_), hamiltonian(std::move(h)), input_state(std::move(psi)), theta0(theta0_) {
  if (d < 1 || k < 1) throw std::invalid_argument("ChainModel: dimensions must be positive");
  if (hamiltonian.rows() != d * k || hamiltonian.cols() != d * k)
    throw std::invalid_argument("ChainModel: Hamiltonian must be (d*k) x (d*k)");
  if (!is_hermitian(hamiltonian, tol::validation))
    throw std::invalid_argument("ChainModel: Hamiltonian not Hermitian");
  if (input_state.dim() != d) throw std::invalid_argument("ChainModel: input state dimension != d");
  if (!std::isfinite(theta0)) throw std::invalid_argument("ChainModel: theta0 not finite");
}

ChainModel ChainModel::at_theta(double theta) const {
  return ChainModel(d, k, hamiltonian, input_state, theta);
}

ChainModel ChainModel::centered() const {
  const double mean = stationary_expectation_real(*this, hamiltonian);
  Matrix shifted = hamiltonian - mean * Matrix::Identity(d * k, d * k);
  return ChainModel(d, k, std::move(shifted), input_state, theta0);
}

ChainModel make_xy_model(double a, double b, double f, double theta0) {
  if (std::abs(a * a + b * b - 1.0) > tol::validation)
    throw std::invalid_argument("make_xy_model: requires a^2 + b^2 = 1");
  Matrix h = kI * (kron(raise_op(), lower_op()) - kron(lower_op(), raise_op()));
  Vector psi(2);
  psi << Complex(a, 0.0), b * std::exp(kI * f);
  return ChainModel(2, 2, std::move(h), PureState::normalized(std::move(psi)), theta0);
}

SuperOperator schrodinger_map(const ChainModel& model) {
  const Matrix u = model.unitary();
  const Matrix proj = model.input_state.projector();
  return SuperOperator::from_action(model.k, [&](const Matrix& rho) {
    return partial_trace_atom(u * kron(proj, rho) * u.adjoint(), model.d, model.k);
  });
}

SuperOperator heisenberg_map(const ChainModel& model) {
  const Matrix u = model.unitary();
  const Matrix id_atom = Matrix::Identity(model.d, model.d);
  return SuperOperator::from_action(model.k, [&](const Matrix& x) {
    return conditional_expectation(u.adjoint() * kron(id_atom, x) * u, model.input_state);
  });
}

SpectralReport spectral_report(const ChainModel& model) {
  const SuperOperator heis = heisenberg_map(model);
  const auto pairs = eig(heis.mat);

  SpectralReport report{std::vector<Complex>{}, Complex{}, 0.0, false, false,
                        DensityMatrix::maximally_mixed(model.k)};
  report.eigenvalues.reserve(pairs.size());
  for (const auto& p : pairs) report.eigenvalues.push_back(p.value);

  int unit_count = 0;
  bool rest_inside = true;
  for (const auto& lambda : report.eigenvalues) {
    if (std::abs(lambda - 1.0) < tol::mixing)
      ++unit_count;
    else if (std::abs(lambda) >= 1.0 - tol::mixing)
      rest_inside = false;
  }
  report.degenerate_unit_eigenvalue = unit_count > 1;
  report.mixing = unit_count == 1 && rest_inside;
  if (report.eigenvalues.size() > 1) {
    report.lambda2 = report.eigenvalues[1];
    report.gap = 1.0 - std::abs(report.lambda2);
  }

  // Stationary state: eigenvalue-1 eigenvector of the Schrodinger map, which
  // is the Hilbert-Schmidt adjoint of the Heisenberg matrix.
  const auto spairs = eig(heis.mat.adjoint());
  const Eigenpair* best = nullptr;
  double best_trace = -1.0;
  for (const auto& p : spairs) {
    if (std::abs(p.value - 1.0) >= tol::mixing) continue;
    const double tr = std::abs(unvec(p.vector, model.k).trace());
    if (tr > best_trace) {
      best_trace = tr;
      best = &p;
    }
  }
  if (best != nullptr && best_trace > 1e-8) {
    report.stationary_state = repair_state(unvec(best->vector, model.k));
  } else {
    // No usable unit-eigenvalue vector; only reachable for pathological
    // degenerate spectra. Fall back to the maximally mixed state.
    report.degenerate_unit_eigenvalue = true;
    report.mixing = false;
  }
  return report;
}

Complex stationary_expectation(const ChainModel& model, const Matrix& x,
                               const DensityMatrix& stationary) {
  if (x.rows() != model.d * model.k || x.cols() != model.d * model.k)
    throw std::invalid_argument("stationary_expectation: observable must act on the joint space");
  const Matrix u = model.unitary();
  const Matrix joint = kron(model.input_state.projector(), stationary.rho);
  return (joint * (u.adjoint() * x * u)).trace();
}

Complex stationary_expectation(const ChainModel& model, const Matrix& x) {
  const SpectralReport report = spectral_report(model);
  if (!report.mixing)
    throw NonMixingError(
        "stationary_expectation: model is not mixing (the transition map needs a unique "
        "eigenvalue 1 with every other eigenvalue strictly inside the unit circle)");
  return stationary_expectation(model, x, report.stationary_state);
}

double stationary_expectation_real(const ChainModel& model, const Matrix& x) {
  const Complex value = stationary_expectation(model, x);
  if (std::abs(value.imag()) > tol::spectral)
    throw std::runtime_error("stationary_expectation_real: unexpected imaginary part");
  return value.real();
}

ConvergenceDiagnostics convergence_diagnostics(const ChainModel& model, const DensityMatrix& rho0,
                                               long n_max) {
  const SpectralReport report = spectral_report(model);
  if (!report.mixing)
    throw NonMixingError("convergence_diagnostics: model is not mixing, no equilibrium to approach");
  const SuperOperator schro = schrodinger_map(model);

  ConvergenceDiagnostics diag;
  diag.log_lambda2 = std::log(std::abs(report.lambda2));
  Vector state = vec(rho0.rho);
  for (long n = 0; n <= n_max; ++n) {
    diag.table.push_back({n, trace_norm(unvec(state, model.k) - report.stationary_state.rho)});
    state = schro.mat * state;
  }

  // Exponential-rate fit on n in [20, 100], above the roundoff floor.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long count = 0;
  for (const auto& row : diag.table) {
    if (row.n < 20 || row.n > 100 || row.distance < 1e-13) continue;
    const double x = static_cast<double>(row.n);
    const double y = std::log(row.distance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    diag.fitted_rate = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  } else {
    diag.fitted_rate = -std::numeric_limits<double>::infinity();  // already at equilibrium
  }
  return diag;
}

}  // namespace qmarkov
