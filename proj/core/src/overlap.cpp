#include "qmarkov/overlap.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qmarkov/fisher.hpp"

namespace qmarkov {

namespace {

const Complex kI{0.0, 1.0};

double wrap_phase(double phi) {
  while (phi > std::numbers::pi) phi -= 2.0 * std::numbers::pi;
  while (phi < -std::numbers::pi) phi += 2.0 * std::numbers::pi;
  return phi;
}

DensityMatrix stationary_or_throw(const ChainModel& model, const char* who) {
  const SpectralReport report = spectral_report(model);
  if (!report.mixing)
    throw NonMixingError(std::string(who) +
                         ": model is not mixing, pass an explicit initial system state");
  return report.stationary_state;
}

}  // namespace

SuperOperator overlap_transfer_map(const ChainModel& model, double theta_left, double theta_right) {
  const Index d = model.d, k = model.k;
  // Injection |psi> (x) 1_k, so column blocks of U * inj are the k x k
  // operators <i| (x) 1 U (|psi> (x) 1).
  Matrix inj = kron(Matrix(model.input_state.amplitudes), Matrix::Identity(k, k));
  const Matrix left = model.unitary_at(theta_left) * inj;
  const Matrix right = model.unitary_at(theta_right) * inj;
  Matrix mat = Matrix::Zero(k * k, k * k);
  for (Index i = 0; i < d; ++i) {
    const Matrix al = left.block(i * k, 0, k, k);
    const Matrix ar = right.block(i * k, 0, k, k);
    mat += kron(ar.transpose(), al.adjoint());  // vec(A^dag X B) = (B^T (x) A^dag) vec(X)
  }
  return {k, std::move(mat)};
}

Complex overlap(const ChainModel& model, const DensityMatrix& initial, long n, double theta_left,
                double theta_right) {
  if (n < 0) throw std::invalid_argument("overlap: n must be >= 0");
  if (initial.dim() != model.k) throw std::invalid_argument("overlap: initial state must be on C^k");
  const SuperOperator transfer = overlap_transfer_map(model, theta_left, theta_right);
  return (initial.rho * transfer.iterate_on_identity(n)).trace();
}

Complex overlap(const ChainModel& model, long n, double theta_left, double theta_right) {
  return overlap(model, stationary_or_throw(model, "overlap"), n, theta_left, theta_right);
}

double qfi_finite_n(const ChainModel& model, const DensityMatrix& initial, long n, double step) {
  if (n < 1) throw std::invalid_argument("qfi_finite_n: n must be >= 1");
  if (step <= 0.0) throw std::invalid_argument("qfi_finite_n: step must be positive");
  auto f = [&](double u, double v) {
    return overlap(model, initial, n, model.theta0 + u, model.theta0 + v);
  };
  auto derivatives = [&](double h) {
    const Complex du = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
    const Complex dv = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
    const Complex duv =
        (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);  // four-corner stencil
    return std::array<Complex, 3>{du, dv, duv};
  };
  const auto coarse = derivatives(step);
  const auto fine = derivatives(step / 2.0);
  std::array<Complex, 3> richardson;
  for (int i = 0; i < 3; ++i) richardson[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  const Complex fisher = 4.0 * (richardson[2] - richardson[0] * richardson[1]);
  return fisher.real();
}

SuperOperator lan_transfer_map(const ChainModel& model, double u, double v, long n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return overlap_transfer_map(model, model.theta0 + u / rn, model.theta0 + v / rn);
}

MapExpansion lan_map_expansion(const ChainModel& model, double u, double v) {
  const Matrix uni = model.unitary();
  const Matrix id_atom = Matrix::Identity(model.d, model.d);
  const Matrix& h = model.hamiltonian;
  auto conditional = [uni, &model](const Matrix& y) {
    return conditional_expectation(uni.adjoint() * y * uni, model.input_state);
  };
  MapExpansion exp;
  exp.T0 = heisenberg_map(model);
  exp.T1 = SuperOperator::from_action(model.k, [&](const Matrix& x) {
    const Matrix joint = kron(id_atom, x);
    return conditional(kI * (u * h * joint - v * joint * h));
  });
  exp.T2 = SuperOperator::from_action(model.k, [&](const Matrix& x) {
    const Matrix joint = kron(id_atom, x);
    return conditional(-0.5 * (u * u * h * h * joint + v * v * joint * h * h) +
                       u * v * h * joint * h);
  });
  return exp;
}

MapFamily lan_map_family(const ChainModel& model, double u, double v) {
  return [model, u, v](long n) { return lan_transfer_map(model, u, v, n); };
}

LanReport lan_check(const ChainModel& model, double u, double v, const std::vector<long>& n_list) {
  const QfiResult qfi = quantum_fisher(model);
  const ChainModel centered = model.centered();
  const DensityMatrix initial = stationary_or_throw(centered, "lan_check");

  LanReport report;
  report.u = u;
  report.v = v;
  report.fisher = qfi.fisher_per_atom;
  report.phase_coefficient = qfi.phase_coefficient;
  const double target_modulus = std::exp(-report.fisher * (u - v) * (u - v) / 8.0);
  const double target_phase = report.phase_coefficient * (u * u - v * v);
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("lan_check: n must be >= 1");
    const double rn = std::sqrt(static_cast<double>(n));
    LanRow row;
    row.n = n;
    row.value =
        overlap(centered, initial, n, centered.theta0 + u / rn, centered.theta0 + v / rn);
    row.modulus_error = std::abs(std::abs(row.value) - target_modulus) / target_modulus;
    row.phase_error = std::abs(wrap_phase(std::arg(row.value) - target_phase));
    report.table.push_back(row);
  }
  return report;
}

double extract_phase_coefficient(const ChainModel& model, long n,
                                 const std::vector<std::pair<double, double>>& design) {
  const ChainModel centered = model.centered();
  const DensityMatrix initial = stationary_or_throw(centered, "extract_phase_coefficient");
  const double rn = std::sqrt(static_cast<double>(n));
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [u, v] : design) {
    const double x = u * u - v * v;
    if (std::abs(x) < 1e-12) continue;
    const Complex value =
        overlap(centered, initial, n, centered.theta0 + u / rn, centered.theta0 + v / rn);
    sxx += x * x;
    sxy += x * std::arg(value);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("extract_phase_coefficient: design needs points with u^2 != v^2");
  return sxy / sxx;
}

std::vector<IidRow> iid_sanity_overlap(const Matrix& j, const PureState& psi, double u, double v,
                                       const std::vector<long>& n_list) {
  if (!is_hermitian(j, tol::validation))
    throw std::invalid_argument("iid_sanity_overlap: generator must be Hermitian");
  const Complex mean = (psi.amplitudes.adjoint() * j * psi.amplitudes)(0);
  if (std::abs(mean) > tol::validation)
    throw std::invalid_argument("iid_sanity_overlap: generator must satisfy <psi|J|psi> = 0");

  // A chain with a one-dimensional system: the transfer map is the scalar
  // <psi| e^{i(u-v)J/sqrt(n)} |psi> and the overlap is its n-th power.
  const ChainModel scalar_chain(j.rows(), 1, j, psi, 0.0);
  const DensityMatrix trivial(Matrix::Identity(1, 1));
  const double fisher = 4.0 * (psi.amplitudes.adjoint() * j * j * psi.amplitudes)(0).real();
  const double delta = u - v;
  const double target = std::exp(-delta * delta * fisher / 8.0);

  std::vector<IidRow> rows;
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("iid_sanity_overlap: n must be >= 1");
    const double rn = std::sqrt(static_cast<double>(n));
    IidRow row;
    row.n = n;
    row.value = overlap(scalar_chain, trivial, n, u / rn, v / rn);
    row.error = std::abs(row.value - target);
    rows.push_back(row);
  }
  return rows;
}

std::vector<NonergodicOverlapRow> nonergodic_scaled_overlap(const ChainModel& model,
                                                            const PureState& phi, double u, double v,
                                                            const std::vector<long>& n_list) {
  if (phi.dim() != model.k)
    throw std::invalid_argument("nonergodic_scaled_overlap: phi must be on C^k");
  const Matrix k_op = hermitize(conditional_expectation(model.hamiltonian, model.input_state));
  // e^{i(u-v)K} = expm_hermitian(K, -(u-v))
  const Matrix rotation = expm_hermitian(k_op, -(u - v));
  const Complex target = (phi.amplitudes.adjoint() * rotation * phi.amplitudes)(0);
  const DensityMatrix initial = DensityMatrix::pure(phi);

  std::vector<NonergodicOverlapRow> rows;
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("nonergodic_scaled_overlap: n must be >= 1");
    NonergodicOverlapRow row;
    row.n = n;
    row.value = overlap(model, initial, n, u / static_cast<double>(n), v / static_cast<double>(n));
    row.target = target;
    row.error = std::abs(row.value - target);
    rows.push_back(row);
  }
  return rows;
}

std::vector<NonergodicDynamicsRow> nonergodic_reduced_dynamics(const ChainModel& model,
                                                               const DensityMatrix& rho0, double u,
                                                               const std::vector<long>& n_list) {
  if (rho0.dim() != model.k)
    throw std::invalid_argument("nonergodic_reduced_dynamics: rho0 must be on C^k");
  const Matrix k_op = hermitize(conditional_expectation(model.hamiltonian, model.input_state));
  const Matrix rot = expm_hermitian(k_op, u);  // e^{-iuK}
  const Matrix target = rot * rho0.rho * rot.adjoint();

  std::vector<NonergodicDynamicsRow> rows;
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("nonergodic_reduced_dynamics: n must be >= 1");
    const SuperOperator schro = schrodinger_map(model.at_theta(u / static_cast<double>(n)));
    Vector state = vec(rho0.rho);
    for (long i = 0; i < n; ++i) state = schro.mat * state;
    const Matrix rho_n = unvec(state, model.k);
    NonergodicDynamicsRow row;
    row.n = n;
    row.trace_distance = trace_norm(rho_n - target);
    row.purity = (rho_n * rho_n).trace().real();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qmarkov
