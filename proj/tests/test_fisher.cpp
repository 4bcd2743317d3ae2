#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmarkov/fisher.hpp"
#include "test_helpers.hpp"

using namespace qmarkov;
using testing::max_abs;
using testing::xy_benchmark;

namespace {

// Independent oracle: Richardson-extrapolated central difference of the
// stationary mean theta -> <A (x) 1>_theta.
double stationary_mean_derivative(const ChainModel& model, const Matrix& a, double step = 1e-4) {
  auto mean = [&](double theta) {
    return stationary_expectation_real(model.at_theta(theta),
                                       kron(a, Matrix::Identity(model.k, model.k)));
  };
  auto central = [&](double h) {
    return (mean(model.theta0 + h) - mean(model.theta0 - h)) / (2.0 * h);
  };
  return (4.0 * central(step / 2.0) - central(step)) / 3.0;
}

}  // namespace

TEST_CASE("correction_operator: zero observable, scaling, residual identity") {
  const ChainModel model = xy_benchmark();
  CHECK(max_abs(correction_operator(model, Matrix::Zero(2, 2))) < tol::algebraic);

  const Matrix b1 = correction_operator(model, pauli_z());
  const Matrix b3 = correction_operator(model, 3.0 * pauli_z());
  CHECK(max_abs(b3 - 3.0 * b1) < 1e-10);

  // (Id - T0) B reproduces the centered conditional expectation of A.
  const SuperOperator t0 = heisenberg_map(model);
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  const Matrix u = model.unitary();
  const double mean =
      stationary_expectation_real(model, kron(pauli_z(), Matrix::Identity(2, 2)));
  const Matrix centered = pauli_z() - mean * Matrix::Identity(2, 2);
  const Matrix conditional = conditional_expectation(
      u.adjoint() * kron(centered, Matrix::Identity(2, 2)) * u, model.input_state);
  CHECK(max_abs((b1 - t0.apply(b1)) - conditional) < 1e-12);
}

TEST_CASE("clt_parameters: zero observable and scaling laws") {
  const ChainModel model = xy_benchmark();
  const CltParameters zero = clt_parameters(model, Matrix::Zero(2, 2));
  CHECK(std::abs(zero.mu) < tol::algebraic);
  CHECK(std::abs(zero.sigma2) < tol::algebraic);

  const CltParameters p1 = clt_parameters(model, pauli_z());
  const CltParameters p2 = clt_parameters(model, 2.0 * pauli_z());
  CHECK(std::abs(p2.mu - 2.0 * p1.mu) < 1e-10);
  CHECK(std::abs(p2.sigma2 - 4.0 * p1.sigma2) < 1e-9);
  CHECK(std::abs(p2.mu * p2.mu / p2.sigma2 - p1.mu * p1.mu / p1.sigma2) < 1e-10);
}

TEST_CASE("clt_parameters: mu equals the finite-difference derivative of the stationary mean") {
  const ChainModel model = xy_benchmark();
  for (const Matrix& a : {pauli_x(), pauli_y(), pauli_z()}) {
    const CltParameters params = clt_parameters(model, a);
    const double fd = stationary_mean_derivative(model, a);
    CHECK(std::abs(params.mu - fd) <= 1e-6 * std::max(std::abs(fd), 1e-3));
  }

  std::mt19937 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix a = testing::random_hermitian(gen, 2);
    const CltParameters params = clt_parameters(model, a);
    const double fd = stationary_mean_derivative(model, a);
    CHECK(std::abs(params.mu - fd) <= 1e-6 * std::max(std::abs(fd), 1e-3));
  }
}

TEST_CASE("clt_parameters: sigma^2 is nonnegative on random centered observables") {
  const ChainModel model = xy_benchmark();
  std::mt19937 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const CltParameters params = clt_parameters(model, testing::random_hermitian(gen, 2));
    CHECK(params.sigma2 >= 0.0);  // clipped at 0, warned beyond -1e-10
    CHECK(params.warnings.empty());
  }
}

TEST_CASE("classical_fisher: invariances and edge cases") {
  const ChainModel model = xy_benchmark();
  const double base = classical_fisher(model, pauli_z());
  CHECK(base >= 0.0);
  CHECK(std::abs(classical_fisher(model, 2.5 * pauli_z()) - base) < 1e-9);
  CHECK(std::abs(classical_fisher(model, pauli_z() + 0.7 * Matrix::Identity(2, 2)) - base) < 1e-9);

  // A multiple of the identity carries no signal at all: mu = sigma^2 = 0.
  CltParameters degenerate = clt_parameters(model, Matrix::Identity(2, 2));
  CHECK_THROWS_AS(classical_fisher(degenerate), std::domain_error);

  degenerate.mu = 1.0;  // sigma^2 = 0 with drift: infinite information flag
  CHECK(std::isinf(classical_fisher(degenerate)));
}

TEST_CASE("quantum_fisher: dark input gives zero information") {
  const QfiResult result = quantum_fisher(make_xy_model(1.0, 0.0, 0.0, std::acos(0.5)));
  CHECK(std::abs(result.fisher_per_atom) < 1e-10);
}

TEST_CASE("quantum_fisher: matches the closed form at the benchmark") {
  const ChainModel model = xy_benchmark();
  const QfiResult result = quantum_fisher(model);
  const double closed = xy_closed_form_fisher(0.6, 0.8, 0.5);
  CHECK(std::abs(result.fisher_per_atom - closed) < 1e-8 * closed);
  CHECK(is_hermitian(result.generator_average, tol::algebraic * 10));
}

TEST_CASE("quantum_fisher: independent of the input phase") {
  double reference = 0.0;
  double spread = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double f = 2.0 * std::acos(-1.0) * i / 8.0;
    const double value = quantum_fisher(make_xy_model(0.6, 0.8, f, std::acos(0.5))).fisher_per_atom;
    if (i == 0)
      reference = value;
    else
      spread = std::max(spread, std::abs(value - reference));
  }
  CHECK(spread < 1e-9);
}

TEST_CASE("xy_closed_form_fisher: hand values and the vanishing-coupling divergence") {
  CHECK(xy_closed_form_fisher(1.0, 0.0, 0.3) == 0.0);

  const double balanced = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(xy_closed_form_fisher(balanced, balanced, 0.0) - 1.0) < tol::algebraic);

  // F ~ const / theta^2 as theta -> 0: theta^2 F approaches a constant.
  const double t1 = 1e-2, t2 = 1e-3;
  const double f1 = xy_closed_form_fisher(0.6, 0.8, std::cos(t1));
  const double f2 = xy_closed_form_fisher(0.6, 0.8, std::cos(t2));
  CHECK(f2 > f1);
  CHECK(std::abs(t1 * t1 * f1 - t2 * t2 * f2) < 0.01 * t1 * t1 * f1);

  CHECK_THROWS_AS(xy_closed_form_fisher(0.6, 0.8, 1.0), std::invalid_argument);
}

TEST_CASE("scan_observables: dominance, symmetry, positive maximum") {
  const ChainModel model = xy_benchmark();
  const ScanResult scan = scan_observables(model, 400);
  const double bound = quantum_fisher(model).fisher_per_atom;
  for (const auto& p : scan.grid) {
    CHECK(p.fisher >= 0.0);
    CHECK(p.fisher <= bound + 1e-8);
  }
  CHECK(scan.best.fisher > 0.0);
  CHECK(scan.best.fisher <= bound + 1e-8);

  // Antipodal directions measure the same statistic up to sign.
  const double plus = classical_fisher(model, bloch_observable(0.3, -0.5, 0.8));
  const double minus = classical_fisher(model, bloch_observable(-0.3, 0.5, -0.8));
  CHECK(std::abs(plus - minus) < 1e-10);

  // The refined maximum cannot fall below the lattice maximum.
  double grid_max = 0.0;
  for (const auto& p : scan.grid) grid_max = std::max(grid_max, p.fisher);
  CHECK(scan.best.fisher >= grid_max - 1e-12);
}

TEST_CASE("fisher operations reject non-mixing models") {
  const ChainModel frozen = make_xy_model(0.6, 0.8, 0.0, 0.0);
  CHECK_THROWS_AS(quantum_fisher(frozen), NonMixingError);
  CHECK_THROWS_AS(clt_parameters(frozen, pauli_z()), NonMixingError);
}
