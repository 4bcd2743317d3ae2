#pragma once

#include <utility>
#include <vector>

#include "qmarkov/perturbation.hpp"

namespace qmarkov {

/// Transfer map X -> <psi| U(theta_left)^dag (1 (x) X) U(theta_right) |psi>.
/// Its n-fold iterate at 1, traced against the initial system state, is the
/// inner product of the n-step output states at the two parameter values.
/// At theta_left = theta_right it reduces to the Heisenberg map.
SuperOperator overlap_transfer_map(const ChainModel& model, double theta_left, double theta_right);

/// <psi^n(theta_left) | psi^n(theta_right)> at cost O(n k^4); no exponential
/// state is ever materialized.
Complex overlap(const ChainModel& model, const DensityMatrix& initial, long n, double theta_left,
                double theta_right);

/// Same with the stationary state as initial system state (mixing only).
Complex overlap(const ChainModel& model, long n, double theta_left, double theta_right);

/// Quantum Fisher information of the n-step output, via Richardson-
/// extrapolated central differences of f(u,v) = overlap(theta0+u, theta0+v):
/// F(n) = 4 (d_u d_v f - d_u f d_v f) at u = v = 0.
double qfi_finite_n(const ChainModel& model, const DensityMatrix& initial, long n,
                    double step = 1e-3);

struct LanRow {
  long n;
  Complex value;         // overlap at theta0 + u/sqrt(n) vs theta0 + v/sqrt(n)
  double modulus_error;  // | |value| - e^{-F(u-v)^2/8} | / e^{-F(u-v)^2/8}
  double phase_error;    // | arg(value) - a (u^2 - v^2) |, wrapped
};

struct LanReport {
  std::vector<LanRow> table;
  double u = 0.0, v = 0.0;
  double fisher = 0.0;             // F used in the target
  double phase_coefficient = 0.0;  // a used in the target
};

/// Gaussian-limit check of the local output family: the overlap at local
/// parameters u, v against e^{ia(u^2-v^2)} e^{-F(u-v)^2/8}. The model is
/// centered internally; mixing required.
LanReport lan_check(const ChainModel& model, double u, double v, const std::vector<long>& n_list);

/// Least-squares phase coefficient from overlap phases at fixed n over a
/// (u,v) design: arg overlap ~ a (u^2 - v^2). Cross-checks the analytic
/// phase_coefficient of quantum_fisher independently of the formula.
double extract_phase_coefficient(const ChainModel& model, long n,
                                 const std::vector<std::pair<double, double>>& design);

struct IidRow {
  long n;
  Complex value;
  double error;  // |value - e^{-(u-v)^2 F / 8}|
};

/// Independent-copies sanity harness: <psi| e^{i(u-v)J/sqrt(n)} |psi>^n for
/// a centered generator J, realized as a chain with a one-dimensional system
/// so the transfer map is scalar. Limit e^{-(u-v)^2 F/8}, F = 4 <J^2>.
std::vector<IidRow> iid_sanity_overlap(const Matrix& j, const PureState& psi, double u, double v,
                                       const std::vector<long>& n_list);

struct NonergodicOverlapRow {
  long n;
  Complex value;   // overlap at theta = u/n vs theta = v/n
  Complex target;  // <phi| e^{i(u-v)K} |phi>, K = <psi|H|psi>
  double error;
};

/// Output overlap in the theta = u/n scaling, where the chain decouples and
/// the system is effectively rotated by K. Valid for non-mixing models.
std::vector<NonergodicOverlapRow> nonergodic_scaled_overlap(const ChainModel& model,
                                                            const PureState& phi, double u, double v,
                                                            const std::vector<long>& n_list);

struct NonergodicDynamicsRow {
  long n;
  double trace_distance;  // || T_*(n)^n(rho0) - e^{-iuK} rho0 e^{iuK} ||_1
  double purity;          // Tr(rho_n^2)
};

/// Reduced dynamics in the theta = u/n scaling against the unitary limit.
std::vector<NonergodicDynamicsRow> nonergodic_reduced_dynamics(const ChainModel& model,
                                                               const DensityMatrix& rho0, double u,
                                                               const std::vector<long>& n_list);

// Expansion family behind the Gaussian limit: the overlap transfer map at
// theta0 + u/sqrt(n) vs theta0 + v/sqrt(n). The model must be centered.
SuperOperator lan_transfer_map(const ChainModel& model, double u, double v, long n);
MapExpansion lan_map_expansion(const ChainModel& model, double u, double v);
MapFamily lan_map_family(const ChainModel& model, double u, double v);

}  // namespace qmarkov
