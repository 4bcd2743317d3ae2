#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmarkov/fisher.hpp"
#include "qmarkov/overlap.hpp"
#include "qmarkov/perturbation.hpp"
#include "test_helpers.hpp"

using namespace qmarkov;
using testing::max_abs;
using testing::xy_benchmark;

namespace {

const std::vector<long> kFitList = {100, 178, 316, 562, 1000, 1778, 3162, 5623, 10000};

SuperOperator rank_one_mixing_map(const DensityMatrix& rho_st) {
  // T0(X) = Tr(rho_st X) 1: unital, mixing, and Id - T0 acts as the identity
  // on the complement of 1. Tr(rho_st X) = vec(rho_st)^dag vec(X).
  const Index k = rho_st.dim();
  const Matrix id = Matrix::Identity(k, k);
  return SuperOperator(k, vec(id) * vec(rho_st.rho).adjoint());
}

}  // namespace

TEST_CASE("StationaryPairing: sesquilinear with unit normalization") {
  std::mt19937 gen(3);
  const StationaryPairing pairing{testing::random_density(gen, 3)};
  const Matrix id = Matrix::Identity(3, 3);
  CHECK(std::abs(pairing(id, id) - Complex(1.0, 0.0)) < tol::algebraic);

  const Matrix a = testing::random_matrix(gen, 3, 3);
  const Matrix b = testing::random_matrix(gen, 3, 3);
  const Matrix c = testing::random_matrix(gen, 3, 3);
  const Complex alpha(0.3, -0.8);
  CHECK(std::abs(pairing(a, alpha * b + c) - (alpha * pairing(a, b) + pairing(a, c))) <
        tol::algebraic * 10);
  CHECK(std::abs(pairing(alpha * a, b) - std::conj(alpha) * pairing(a, b)) < tol::algebraic * 10);
}

TEST_CASE("rank_one_mixing_map is unital and mixing") {
  std::mt19937 gen(5);
  const DensityMatrix rho = testing::random_density(gen, 2);
  const SuperOperator t0 = rank_one_mixing_map(rho);
  CHECK(t0.is_unital(tol::algebraic));
  CHECK(max_abs(stationary_from_heisenberg(t0).rho - rho.rho) < 1e-9);
}

TEST_CASE("restricted_inverse_apply: zero input, rank-one map identity action") {
  std::mt19937 gen(7);
  const DensityMatrix rho = testing::random_density(gen, 2);
  const SuperOperator t0 = rank_one_mixing_map(rho);

  CHECK(max_abs(restricted_inverse_apply(t0, rho, Matrix::Zero(2, 2))) == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    Matrix y = testing::random_matrix(gen, 2, 2);
    y -= (rho.rho * y).trace() * Matrix::Identity(2, 2);  // center
    CHECK(max_abs(restricted_inverse_apply(t0, rho, y) - y) < 1e-10);
  }
}

TEST_CASE("restricted_inverse_apply: residuals on the benchmark chain") {
  const ChainModel model = xy_benchmark();
  const SuperOperator t0 = heisenberg_map(model);
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  const Matrix id = Matrix::Identity(2, 2);
  const Matrix a = Matrix::Identity(4, 4) - t0.mat;

  std::mt19937 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix y = testing::random_matrix(gen, 2, 2);
    y -= (rho_st.rho * y).trace() * id;
    const Matrix x = restricted_inverse_apply(t0, rho_st, y);
    CHECK((a * vec(x) - vec(y)).norm() < 1e-12 * std::max(1.0, y.norm()));
    CHECK(std::abs((rho_st.rho * x).trace()) < 1e-10);
  }
}

TEST_CASE("restricted_inverse_apply: rejects uncentered input and non-mixing maps") {
  const ChainModel model = xy_benchmark();
  const SuperOperator t0 = heisenberg_map(model);
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  CHECK_THROWS_AS(restricted_inverse_apply(t0, rho_st, Matrix::Identity(2, 2)),
                  std::invalid_argument);

  const ChainModel frozen = make_xy_model(0.6, 0.8, 0.0, 0.0);
  const SuperOperator identity_map = heisenberg_map(frozen);
  Matrix y = Matrix::Zero(2, 2);
  y(0, 1) = 1.0;
  CHECK_THROWS_AS(
      restricted_inverse_apply(identity_map, DensityMatrix::maximally_mixed(2), y),
      NonMixingError);
}

TEST_CASE("restricted_inverse_apply: linearity and Hermiticity preservation") {
  const ChainModel model = xy_benchmark();
  const SuperOperator t0 = heisenberg_map(model);
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  const Matrix id = Matrix::Identity(2, 2);
  auto center = [&](Matrix m) { return Matrix(m - (rho_st.rho * m).trace() * id); };

  std::mt19937 gen(13);
  const Matrix y1 = center(testing::random_matrix(gen, 2, 2));
  const Matrix y2 = center(testing::random_matrix(gen, 2, 2));
  const Complex alpha(1.3, -0.2), beta(0.4, 0.9);
  const Matrix combined = restricted_inverse_apply(t0, rho_st, alpha * y1 + beta * y2);
  const Matrix split = alpha * restricted_inverse_apply(t0, rho_st, y1) +
                       beta * restricted_inverse_apply(t0, rho_st, y2);
  CHECK(max_abs(combined - split) < 1e-11);

  const Matrix yh = center(testing::random_hermitian(gen, 2));
  CHECK(is_hermitian(restricted_inverse_apply(t0, rho_st, yh), 1e-11));
}

TEST_CASE("lambda_second_order: trivial expansions") {
  const ChainModel model = xy_benchmark();
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  MapExpansion exp{heisenberg_map(model), SuperOperator::zero(2), SuperOperator::zero(2)};
  CHECK(std::abs(lambda_second_order(exp, rho_st)) < tol::algebraic);

  // Equal local parameters: the overlap family degenerates and lambda = 0.
  const ChainModel centered = model.centered();
  const MapExpansion same = lan_map_expansion(centered, 0.8, 0.8);
  CHECK(std::abs(lambda_second_order(same, rho_st)) < 1e-10);
}

TEST_CASE("lambda_second_order: real part matches -F (u-v)^2 / 8") {
  const ChainModel model = xy_benchmark();
  const ChainModel centered = model.centered();
  const DensityMatrix rho_st = spectral_report(centered).stationary_state;
  const double fisher = quantum_fisher(model).fisher_per_atom;

  const double u = 1.0, v = -0.5;
  const Complex lambda = lambda_second_order(lan_map_expansion(centered, u, v), rho_st);
  CHECK(std::abs(lambda.real() + fisher * (u - v) * (u - v) / 8.0) < 1e-10);
}

TEST_CASE("lambda_second_order: hypothesis violation is rejected") {
  const ChainModel model = xy_benchmark();
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  // T1 = rank-one map with T1(1) = 1, so <1, T1(1)>_st = 1 != 0.
  MapExpansion exp{heisenberg_map(model), rank_one_mixing_map(rho_st), SuperOperator::zero(2)};
  CHECK_THROWS_AS(lambda_second_order(exp, rho_st), std::invalid_argument);
}

TEST_CASE("lambda_second_order: invariant under T2 shifts that vanish against rho_st") {
  const ChainModel model = xy_benchmark();
  const ChainModel centered = model.centered();
  const DensityMatrix rho_st = spectral_report(centered).stationary_state;
  MapExpansion exp = lan_map_expansion(centered, 1.0, 0.0);
  const Complex before = lambda_second_order(exp, rho_st);

  // Z(X) = Tr(E X) W with Tr(rho_st W) = 0: Tr(rho_st Z(1)) = 0.
  std::mt19937 gen(17);
  Matrix w = testing::random_matrix(gen, 2, 2);
  w -= (rho_st.rho * w).trace() * Matrix::Identity(2, 2);
  const Matrix e = testing::random_matrix(gen, 2, 2);
  const SuperOperator z(2, vec(w) * vec(e.adjoint().eval()).adjoint());
  exp.T2 = exp.T2 + z;
  CHECK(std::abs(lambda_second_order(exp, rho_st) - before) < tol::algebraic * 10);
}

TEST_CASE("verify_iterated_limit: constant mixing family stays at 1") {
  const ChainModel model = xy_benchmark();
  const SuperOperator t0 = heisenberg_map(model);
  const DensityMatrix rho_st = spectral_report(model).stationary_state;
  MapExpansion exp{t0, SuperOperator::zero(2), SuperOperator::zero(2)};
  const auto report = verify_iterated_limit([&](long) { return t0; }, exp, rho_st, {1, 10, 100});
  CHECK(std::abs(report.lambda) < tol::algebraic);
  for (const auto& row : report.table) {
    CHECK(std::abs(row.value - Complex(1.0, 0.0)) < 1e-11);
    CHECK(row.error < 1e-11);
  }
}

TEST_CASE("verify_iterated_limit: measurement family at u = 0 reaches exp(-sigma^2 t^2/2)") {
  const ChainModel model = xy_benchmark();
  const CltParameters params = clt_parameters(model, pauli_z());
  const Matrix a = params.centered_observable;
  const double t = 0.4;

  const auto report = verify_iterated_limit(
      clt_characteristic_family(model, a, 0.0, t), clt_characteristic_expansion(model, a, 0.0, t),
      spectral_report(model).stationary_state, kFitList);
  CHECK(std::abs(report.lambda - Complex(-params.sigma2 * t * t / 2.0, 0.0)) < 1e-9);
  CHECK(std::abs(report.table.back().value - report.limit_value) < 1e-2);
  CHECK(report.fitted_decay_exponent < -0.4);
}

TEST_CASE("verify_iterated_limit: local-overlap family decays like n^{-1/2}") {
  const ChainModel centered = xy_benchmark().centered();
  const DensityMatrix rho_st = spectral_report(centered).stationary_state;
  const auto report = verify_iterated_limit(lan_map_family(centered, 1.0, 0.0),
                                            lan_map_expansion(centered, 1.0, 0.0), rho_st, kFitList);

  // Error at the largest n stays within 5x of the fitted C n^{-1/2} model.
  double c_fit = 0.0;
  long count = 0;
  for (const auto& row : report.table) {
    c_fit += row.error * std::sqrt(static_cast<double>(row.n));
    ++count;
  }
  c_fit /= static_cast<double>(count);
  const auto& last = report.table.back();
  CHECK(last.error < 5.0 * c_fit / std::sqrt(static_cast<double>(last.n)));
}

TEST_CASE("verify_iterated_limit: rejects a family inconsistent with its expansion") {
  const ChainModel centered = xy_benchmark().centered();
  const DensityMatrix rho_st = spectral_report(centered).stationary_state;
  MapExpansion wrong = lan_map_expansion(centered, 1.0, 0.0);
  wrong.T1 = 2.0 * wrong.T1;  // the family now misses T1/sqrt(n)
  CHECK_THROWS_AS(
      verify_iterated_limit(lan_map_family(centered, 1.0, 0.0), wrong, rho_st, kFitList),
      std::invalid_argument);
}

TEST_CASE("leading_eigen_expansion: constant family fits to lambda(n) = 1") {
  const ChainModel model = xy_benchmark();
  const SuperOperator t0 = heisenberg_map(model);
  const auto report = leading_eigen_expansion([&](long) { return t0; }, kFitList);
  for (const auto& row : report.table) CHECK(std::abs(row.lambda_n - 1.0) < tol::spectral);
  CHECK(std::abs(report.lambda2_fit) < 1e-6);
}

TEST_CASE("leading_eigen_expansion: fitted lambda2 matches the second-order scalar") {
  const ChainModel centered = xy_benchmark().centered();
  const DensityMatrix rho_st = spectral_report(centered).stationary_state;
  const double u = 1.0, v = 0.0;
  const Complex analytic = lambda_second_order(lan_map_expansion(centered, u, v), rho_st);
  const auto report = leading_eigen_expansion(lan_map_family(centered, u, v), kFitList);
  CHECK(std::abs(report.lambda2_fit - analytic) < 0.02 * std::abs(analytic));
  // lambda1 vanishes whenever <1, T1(1)>_st = 0.
  CHECK(std::abs(report.lambda1_fit) < 1e-3);
}

TEST_CASE("leading_eigen_expansion: needs enough points and a separated leading eigenvalue") {
  const ChainModel model = xy_benchmark();
  const SuperOperator t0 = heisenberg_map(model);
  CHECK_THROWS_AS(leading_eigen_expansion([&](long) { return t0; }, {10, 100}),
                  std::invalid_argument);

  const SuperOperator id = SuperOperator::identity(2);
  CHECK_THROWS_AS(leading_eigen_expansion([&](long) { return id; }, kFitList), std::runtime_error);
}
