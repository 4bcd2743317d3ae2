#pragma once

#include <string>
#include <vector>

#include "qmarkov/perturbation.hpp"

namespace qmarkov {

/// Mean slope, asymptotic variance and correction operator of the normal
/// limit of sqrt(n) * (time average of repeated measurements of A).
struct CltParameters {
  double mu = 0.0;      // d<A>/dtheta at theta0
  double sigma2 = 0.0;  // asymptotic variance of sqrt(n) Abar_n
  Matrix correction;    // B on C^k, Hermitian
  Matrix centered_observable;  // A - <A (x) 1> 1 on C^d
  std::vector<std::string> warnings;
};

/// Asymptotic quantum Fisher information per probe and its ingredients.
struct QfiResult {
  double fisher_per_atom = 0.0;   // F
  Matrix generator_average;       // K = <psi| H_c |psi> on C^k
  double correction_term = 0.0;   // 4 <{H, (Id-T0)^{-1} K}>, the non-i.i.d. part of F
  double phase_coefficient = 0.0; // a = -Im <H (Id-T0)^{-1} K>
};

/// B = (Id - T0)^{-1} <psi| U^dag (A_c (x) 1) U |psi> with A auto-centered.
/// Requires a mixing model.
Matrix correction_operator(const ChainModel& model, const Matrix& a);

CltParameters clt_parameters(const ChainModel& model, const Matrix& a);

/// mu^2 / sigma^2. Returns +infinity when sigma^2 vanishes with mu != 0;
/// throws std::domain_error when both vanish.
double classical_fisher(const CltParameters& params);
double classical_fisher(const ChainModel& model, const Matrix& a);

/// F = 4[<H^2> + <{H, (Id-T0)^{-1} K}>] with H auto-centered. Mixing only.
QfiResult quantum_fisher(const ChainModel& model);

/// Closed form for the exchange-interaction example,
/// F = 16 a^4 b^4 / ((1-c)(1-c+4 a^2 b^2 c)) with c = cos(theta0).
double xy_closed_form_fisher(double a, double b, double c);

struct ScanPoint {
  double nx = 0.0, ny = 0.0, nz = 0.0;
  double fisher = 0.0;
};

struct ScanResult {
  std::vector<ScanPoint> grid;  // spherical Fibonacci lattice, deterministic order
  ScanPoint best;               // lattice argmax refined by pattern search
  std::vector<std::string> warnings;
};

/// Classical Fisher information of spin measurements over a Bloch-sphere
/// lattice (d = 2 only), with the maximizing direction refined to 1e-4 in
/// the spherical angles.
ScanResult scan_observables(const ChainModel& model, int resolution = 2000);

/// Observable n . sigma for a unit Bloch vector.
Matrix bloch_observable(double nx, double ny, double nz);

// Expansion family behind the measurement central limit theorem: the map
// X -> E[ e^{iHu/sqrt(n)} (e^{itA/sqrt(n)} (x) X) e^{-iHu/sqrt(n)} | s ]
// whose n-fold iterate at 1 is the characteristic function of sqrt(n) Abar_n.
// A must be centered.
SuperOperator clt_characteristic_map(const ChainModel& model, const Matrix& a_centered, double u,
                                     double t, long n);
MapExpansion clt_characteristic_expansion(const ChainModel& model, const Matrix& a_centered,
                                          double u, double t);
MapFamily clt_characteristic_family(const ChainModel& model, const Matrix& a_centered, double u,
                                    double t);

}  // namespace qmarkov
