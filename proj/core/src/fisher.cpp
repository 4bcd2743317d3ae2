#include "qmarkov/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qmarkov {

namespace {

const Complex kI{0.0, 1.0};

// Everything the per-observable operations share for a fixed model.
struct StationaryContext {
  const ChainModel& model;
  SpectralReport report;
  SuperOperator heisenberg;
  Matrix unitary;
  Matrix id_atom;
  Matrix id_sys;

  explicit StationaryContext(const ChainModel& m)
      : model(m),
        report(spectral_report(m)),
        heisenberg(heisenberg_map(m)),
        unitary(m.unitary()),
        id_atom(Matrix::Identity(m.d, m.d)),
        id_sys(Matrix::Identity(m.k, m.k)) {
    if (!report.mixing)
      throw NonMixingError(
          "Fisher-information operations need a mixing model: the transition map must have a "
          "unique eigenvalue 1 with every other eigenvalue strictly inside the unit circle");
  }

  Complex expect(const Matrix& x) const {
    return stationary_expectation(model, x, report.stationary_state);
  }

  double expect_real(const Matrix& x) const {
    const Complex v = expect(x);
    if (std::abs(v.imag()) > tol::spectral)
      throw std::runtime_error("stationary expectation: unexpected imaginary part");
    return v.real();
  }

  Matrix center_observable(const Matrix& a) const {
    const double mean = expect_real(kron(a, id_sys)).real();
    return a - mean * Matrix::Identity(a.rows(), a.cols());
  }
};

Matrix correction_from_context(const StationaryContext& ctx, const Matrix& a_centered) {
  const Matrix conditional = conditional_expectation(
      ctx.unitary.adjoint() * kron(a_centered, ctx.id_sys) * ctx.unitary, ctx.model.input_state);
  const Matrix b =
      restricted_inverse_apply(ctx.heisenberg, ctx.report.stationary_state, conditional);
  // The exact solution is Hermitian for Hermitian input; symmetrize roundoff.
  return hermitize(b);
}

CltParameters clt_from_context(const StationaryContext& ctx, const Matrix& a) {
  if (!is_hermitian(a, tol::validation))
    throw std::invalid_argument("clt_parameters: observable must be Hermitian");
  CltParameters params;
  params.centered_observable = ctx.center_observable(a);
  params.correction = correction_from_context(ctx, params.centered_observable);

  const Matrix& h = ctx.model.hamiltonian;
  const Matrix joint_a = kron(params.centered_observable, ctx.id_sys);
  const Matrix joint_b = kron(ctx.id_atom, params.correction);

  params.mu = (kI * ctx.expect(commutator(h, joint_a + joint_b))).real();
  const double raw_sigma2 =
      ctx.expect_real(kron(params.centered_observable * params.centered_observable, ctx.id_sys)) +
      2.0 * ctx.expect_real(kron(params.centered_observable, params.correction));
  params.sigma2 = raw_sigma2;
  if (raw_sigma2 < 0.0) {
    params.sigma2 = 0.0;
    if (raw_sigma2 < -tol::positivity)
      params.warnings.push_back("sigma^2 clipped to 0 from " + std::to_string(raw_sigma2));
  }
  return params;
}

}  // namespace

Matrix correction_operator(const ChainModel& model, const Matrix& a) {
  StationaryContext ctx(model);
  return correction_from_context(ctx, ctx.center_observable(a));
}

CltParameters clt_parameters(const ChainModel& model, const Matrix& a) {
  StationaryContext ctx(model);
  return clt_from_context(ctx, a);
}

double classical_fisher(const CltParameters& params) {
  if (params.sigma2 <= tol::algebraic) {
    if (std::abs(params.mu) <= tol::spectral)
      throw std::domain_error("classical_fisher: both mu and sigma^2 vanish, information undefined");
    return std::numeric_limits<double>::infinity();
  }
  return params.mu * params.mu / params.sigma2;
}

double classical_fisher(const ChainModel& model, const Matrix& a) {
  return classical_fisher(clt_parameters(model, a));
}

QfiResult quantum_fisher(const ChainModel& model) {
  StationaryContext ctx(model);
  const Index dk = model.d * model.k;

  const double h_mean = ctx.expect_real(model.hamiltonian);
  const Matrix h = model.hamiltonian - h_mean * Matrix::Identity(dk, dk);

  QfiResult result;
  result.generator_average = hermitize(conditional_expectation(h, model.input_state));
  const Matrix solved = hermitize(restricted_inverse_apply(
      ctx.heisenberg, ctx.report.stationary_state, result.generator_average));
  const Matrix joint_solved = kron(ctx.id_atom, solved);

  const double h2 = ctx.expect_real(h * h);
  result.correction_term = 4.0 * ctx.expect_real(anticommutator(h, joint_solved));
  result.fisher_per_atom = 4.0 * h2 + result.correction_term;
  result.phase_coefficient = -ctx.expect(h * joint_solved).imag();
  return result;
}

double xy_closed_form_fisher(double a, double b, double c) {
  if (std::abs(a * a + b * b - 1.0) > tol::validation)
    throw std::invalid_argument("xy_closed_form_fisher: requires a^2 + b^2 = 1");
  if (c == 1.0)
    throw std::invalid_argument("xy_closed_form_fisher: diverges at cos(theta0) = 1 (non-mixing)");
  const double a2 = a * a, b2 = b * b;
  return 16.0 * a2 * a2 * b2 * b2 / ((1.0 - c) * (1.0 - c + 4.0 * a2 * b2 * c));
}

Matrix bloch_observable(double nx, double ny, double nz) {
  const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
  if (norm < 1e-12) throw std::invalid_argument("bloch_observable: zero direction");
  return (nx * pauli_x() + ny * pauli_y() + nz * pauli_z()) / norm;
}

ScanResult scan_observables(const ChainModel& model, int resolution) {
  if (model.d != 2)
    throw std::invalid_argument("scan_observables: Bloch parametrization needs d = 2");
  if (resolution < 1) throw std::invalid_argument("scan_observables: resolution must be positive");
  StationaryContext ctx(model);

  ScanResult result;
  long degenerate = 0;
  auto fisher_at = [&](double nx, double ny, double nz) {
    try {
      return classical_fisher(clt_from_context(ctx, bloch_observable(nx, ny, nz)));
    } catch (const std::domain_error&) {
      ++degenerate;
      return 0.0;  // no information flows through a fully degenerate statistic
    }
  };

  // Spherical Fibonacci lattice: near-uniform, no pole clustering.
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  result.grid.reserve(resolution);
  for (int i = 0; i < resolution; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / resolution;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    ScanPoint p;
    p.nx = r * std::cos(phi);
    p.ny = r * std::sin(phi);
    p.nz = z;
    p.fisher = fisher_at(p.nx, p.ny, p.nz);
    result.grid.push_back(p);
  }

  result.best = result.grid.front();
  for (const auto& p : result.grid)
    if (p.fisher > result.best.fisher) result.best = p;

  // Pattern search on the spherical angles, shrinking to 1e-4 rad.
  double polar = std::acos(std::clamp(result.best.nz, -1.0, 1.0));
  double azimuth = std::atan2(result.best.ny, result.best.nx);
  double value = result.best.fisher;
  double step = 2.0 * std::numbers::pi / std::sqrt(static_cast<double>(resolution));
  auto eval_angles = [&](double th, double ph) {
    return fisher_at(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
  };
  while (step > 1e-4) {
    bool improved = false;
    const double candidates[4][2] = {
        {polar + step, azimuth}, {polar - step, azimuth}, {polar, azimuth + step}, {polar, azimuth - step}};
    for (const auto& c : candidates) {
      const double v = eval_angles(c[0], c[1]);
      if (v > value) {
        value = v;
        polar = c[0];
        azimuth = c[1];
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  result.best = {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
                 std::cos(polar), value};
  if (degenerate > 0)
    result.warnings.push_back(std::to_string(degenerate) +
                              " directions had a degenerate statistic and were scored 0");
  return result;
}

SuperOperator clt_characteristic_map(const ChainModel& model, const Matrix& a_centered, double u,
                                     double t, long n) {
  const Matrix uni = model.unitary();
  const double rn = std::sqrt(static_cast<double>(n));
  const Matrix rot = expm_hermitian(model.hamiltonian, -u / rn);  // e^{iHu/sqrt(n)}
  const Matrix atom = expm_hermitian(a_centered, -t / rn);        // e^{itA/sqrt(n)}
  return SuperOperator::from_action(model.k, [&](const Matrix& x) {
    const Matrix y = rot * kron(atom, x) * rot.adjoint();
    return conditional_expectation(uni.adjoint() * y * uni, model.input_state);
  });
}

MapExpansion clt_characteristic_expansion(const ChainModel& model, const Matrix& a_centered,
                                          double u, double t) {
  const Matrix uni = model.unitary();
  const Matrix id_atom = Matrix::Identity(model.d, model.d);
  const Matrix& h = model.hamiltonian;
  auto conditional = [&, uni, id_atom](const Matrix& y) {
    return conditional_expectation(uni.adjoint() * y * uni, model.input_state);
  };
  MapExpansion exp;
  exp.T0 = heisenberg_map(model);
  exp.T1 = SuperOperator::from_action(model.k, [&](const Matrix& x) {
    const Matrix joint = kron(id_atom, x);
    return conditional(kI * (u * commutator(h, joint) + t * kron(a_centered, x)));
  });
  exp.T2 = SuperOperator::from_action(model.k, [&](const Matrix& x) {
    const Matrix joint = kron(id_atom, x);
    return conditional(-0.5 * u * u * commutator(h, commutator(h, joint)) -
                       0.5 * t * t * kron(a_centered * a_centered, x) -
                       u * t * commutator(h, kron(a_centered, x)));
  });
  return exp;
}

MapFamily clt_characteristic_family(const ChainModel& model, const Matrix& a_centered, double u,
                                    double t) {
  return [model, a_centered, u, t](long n) {
    return clt_characteristic_map(model, a_centered, u, t, n);
  };
}

}  // namespace qmarkov
