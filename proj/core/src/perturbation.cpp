#include "qmarkov/perturbation.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace qmarkov {

namespace {

void require_unital_mixing(const SuperOperator& t0) {
  if (!t0.is_unital(tol::spectral))
    throw std::invalid_argument("restricted inverse: T0 must be unital");
  const auto values = eig(t0.mat);
  int unit_count = 0;
  for (const auto& p : values) {
    if (std::abs(p.value - 1.0) < tol::mixing)
      ++unit_count;
    else if (std::abs(p.value) >= 1.0 - tol::mixing)
      throw NonMixingError("restricted inverse: T0 has peripheral spectrum, Id - T0 is singular "
                           "on the complement of 1");
  }
  if (unit_count != 1)
    throw NonMixingError("restricted inverse: eigenvalue 1 of T0 is not simple");
}

double spectral_norm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return x.jacobiSvd().singularValues()(0);
}

// Operator-norm contraction spot check on the identity plus a fixed sample of
// random Hermitian and general operators.
void spot_check_contraction(const SuperOperator& t, long n) {
  std::mt19937 gen(118999);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index k = t.k;
  auto random_matrix = [&](bool hermitian) {
    Matrix m(k, k);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) m(i, j) = Complex(gauss(gen), gauss(gen));
    if (hermitian) m = hermitize(m);
    return m;
  };
  auto check = [&](const Matrix& x) {
    const double nx = spectral_norm(x);
    if (nx < 1e-12) return;
    if (spectral_norm(t.apply(x)) > (1.0 + 1e-10) * nx)
      throw std::invalid_argument("verify_iterated_limit: T(" + std::to_string(n) +
                                  ") is not a contraction on sampled operators");
  };
  check(Matrix::Identity(k, k));
  for (int s = 0; s < 6; ++s) check(random_matrix(true));
  for (int s = 0; s < 4; ++s) check(random_matrix(false));
}

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  long count = 0;
};

LogLogFit fit_log_log(const std::vector<std::pair<double, double>>& points) {
  LogLogFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++fit.count;
  }
  if (fit.count >= 2) {
    fit.slope = (fit.count * sxy - sx * sy) / (fit.count * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / fit.count;
  }
  return fit;
}

}  // namespace

DensityMatrix stationary_from_heisenberg(const SuperOperator& t0) {
  const auto pairs = eig(t0.mat.adjoint());
  const Eigenpair* best = nullptr;
  double best_trace = -1.0;
  for (const auto& p : pairs) {
    if (std::abs(p.value - 1.0) >= tol::mixing) continue;
    const double tr = std::abs(unvec(p.vector, t0.k).trace());
    if (tr > best_trace) {
      best_trace = tr;
      best = &p;
    }
  }
  if (best == nullptr || best_trace < 1e-8)
    throw NonMixingError("stationary_from_heisenberg: no unit-trace fixed point found");
  Matrix h = hermitize(unvec(best->vector, t0.k));
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0);
  vals /= vals.sum();
  return DensityMatrix(hermitize(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().adjoint()));
}

Matrix restricted_inverse_apply(const SuperOperator& t0, const DensityMatrix& rho_st,
                                const Matrix& y) {
  const Index k = t0.k;
  if (y.rows() != k || y.cols() != k)
    throw std::invalid_argument("restricted_inverse_apply: dimension mismatch");
  require_unital_mixing(t0);

  const Matrix id = Matrix::Identity(k, k);
  const Complex overlap = (rho_st.rho * y).trace();  // <1, y>_st
  if (std::abs(overlap) >= tol::centering)
    throw std::invalid_argument("restricted_inverse_apply: y is not centered, |<1,y>_st| = " +
                                std::to_string(std::abs(overlap)));
  const Matrix yc = y - overlap * id;  // remove the sub-tolerance residue

  const Matrix a = Matrix::Identity(k * k, k * k) - t0.mat;
  Matrix x = unvec(a.completeOrthogonalDecomposition().solve(vec(yc)), k);
  x -= (rho_st.rho * x).trace() * id;  // project back to the complement of 1

  const double residual = (a * vec(x) - vec(yc)).norm();
  if (residual > 1e-10 * std::max(1.0, yc.norm()))
    throw std::runtime_error("restricted_inverse_apply: solve residual " + std::to_string(residual));
  return x;
}

Complex lambda_second_order(const MapExpansion& expansion, const DensityMatrix& rho_st) {
  const Index k = expansion.T0.k;
  const Matrix id = Matrix::Identity(k, k);
  const Matrix t1_of_id = expansion.T1.apply(id);
  const Complex hypothesis = (rho_st.rho * t1_of_id).trace();
  if (std::abs(hypothesis) >= tol::centering)
    throw std::invalid_argument("lambda_second_order: <1, T1(1)>_st != 0, got modulus " +
                                std::to_string(std::abs(hypothesis)));
  const Matrix inner = restricted_inverse_apply(expansion.T0, rho_st, t1_of_id);
  return (rho_st.rho * (expansion.T2.apply(id) + expansion.T1.apply(inner))).trace();
}

IteratedLimitReport verify_iterated_limit(const MapFamily& family, const MapExpansion& expansion,
                                          const DensityMatrix& initial,
                                          const std::vector<long>& n_list) {
  if (n_list.empty()) throw std::invalid_argument("verify_iterated_limit: empty n list");
  const Index k = expansion.T0.k;
  const Matrix id = Matrix::Identity(k, k);
  const DensityMatrix rho_st = stationary_from_heisenberg(expansion.T0);

  // Family/expansion consistency: the remainder must vanish like n^{-3/2}.
  const double scale = std::max(1.0, expansion.T0.mat.norm());
  std::vector<std::pair<double, double>> remainders;
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("verify_iterated_limit: n must be >= 1");
    const double rn = std::sqrt(static_cast<double>(n));
    const SuperOperator tn = family(n);
    spot_check_contraction(tn, n);
    const double rem =
        (tn.mat - expansion.T0.mat - expansion.T1.mat / rn - expansion.T2.mat / static_cast<double>(n))
            .norm();
    if (rem > 1e-13 * scale) remainders.emplace_back(static_cast<double>(n), rem);
  }
  if (remainders.size() >= 2) {
    const LogLogFit fit = fit_log_log(remainders);
    if (fit.slope > -1.25)
      throw std::invalid_argument(
          "verify_iterated_limit: family does not match the expansion, remainder decays like "
          "n^" + std::to_string(fit.slope) + " instead of n^{-3/2}");
  }

  IteratedLimitReport report;
  report.lambda = lambda_second_order(expansion, rho_st);
  report.limit_value = std::exp(report.lambda);

  for (long n : n_list) {
    const Matrix iterated = family(n).iterate_on_identity(n);
    IteratedLimitRow row;
    row.n = n;
    row.value = (initial.rho * iterated).trace();
    row.error = (iterated - report.limit_value * id).norm();
    report.table.push_back(row);
  }

  // Decay-exponent fit on the largest half of n_list (transients contaminate
  // the small-n entries).
  std::vector<std::pair<double, double>> points;
  const std::size_t start = report.table.size() / 2;
  for (std::size_t i = start; i < report.table.size(); ++i) {
    if (report.table[i].error > 1e-14)
      points.emplace_back(static_cast<double>(report.table[i].n), report.table[i].error);
  }
  report.fitted_decay_exponent = points.size() >= 2 ? fit_log_log(points).slope : 0.0;
  return report;
}

LeadingEigenReport leading_eigen_expansion(const MapFamily& family, const std::vector<long>& n_list) {
  if (n_list.size() < 4)
    throw std::invalid_argument("leading_eigen_expansion: need at least four n values for the fit");

  LeadingEigenReport report;
  for (long n : n_list) {
    const auto pairs = eig(family(n).mat);
    if (pairs.size() > 1 && std::abs(pairs[0].value) - std::abs(pairs[1].value) < 1e-6)
      throw std::runtime_error("leading_eigen_expansion: leading eigenvalue not separated at n = " +
                               std::to_string(n));
    report.table.push_back({n, pairs[0].value});
  }

  // lambda(n) = l0 + l1 x + l2 x^2 + l3 x^3 with x = 1/sqrt(n); the cubic
  // term absorbs the next order so it does not bias l2.
  const Index rows = static_cast<Index>(report.table.size());
  Matrix design(rows, 4);
  Vector rhs(rows);
  for (Index i = 0; i < rows; ++i) {
    const double x = 1.0 / std::sqrt(static_cast<double>(report.table[i].n));
    design(i, 0) = 1.0;
    design(i, 1) = x;
    design(i, 2) = x * x;
    design(i, 3) = x * x * x;
    rhs(i) = report.table[i].lambda_n;
  }
  const Vector coeff = design.completeOrthogonalDecomposition().solve(rhs);
  report.lambda0_fit = coeff(0);
  report.lambda1_fit = coeff(1);
  report.lambda2_fit = coeff(2);
  return report;
}

}  // namespace qmarkov
