#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qmarkov/fisher.hpp"

namespace qmarkov {

/// Counter-based stream derivation: the (master_seed, index) pair fully
/// determines a trajectory's random stream, independent of scheduling.
std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index);

struct TrajectoryConfig {
  long n_steps = 1;
  long n_trajectories = 1;
  std::uint64_t master_seed = 0;
  Matrix observable;  // A on C^d
  double theta0 = 0.0;
  double u = 0.0;  // true theta = theta0 + u / sqrt(n_steps)

  double theta_true() const;
};

struct TrajectoryRecord {
  std::vector<double> outcomes;  // eigenvalues of A, one per step
  double time_average = 0.0;
  DensityMatrix final_state;
};

struct SpectralDecomposition {
  std::vector<double> values;      // ascending, degeneracies merged
  std::vector<Matrix> projectors;  // onto the merged eigenspaces
};

/// Eigendecomposition of a Hermitian observable with eigenvalues closer than
/// degeneracy_tol merged into a single projector.
SpectralDecomposition spectral_decomposition(const Matrix& a, double degeneracy_tol = 1e-10);

/// Projective instrument for measuring A on the outgoing probe after one
/// interaction step, precomputed for a fixed model and observable.
class MeasurementProcess {
 public:
  MeasurementProcess(const ChainModel& model_at_theta, const Matrix& a);

  /// Draw in [0,1) selects the outcome; returns (eigenvalue, posterior).
  /// Outcome probabilities sum to 1 within tol::algebraic or this throws.
  std::pair<double, Matrix> step(const Matrix& rho, double draw) const;

  const SpectralDecomposition& decomposition() const { return decomp_; }

 private:
  SpectralDecomposition decomp_;
  // blocks_[outcome][j] = (<j| (x) 1)(P_outcome (x) 1) U (|psi> (x) 1)
  std::vector<std::vector<Matrix>> blocks_;
  Index k_;
};

std::pair<double, DensityMatrix> measure_step(const DensityMatrix& rho,
                                              const ChainModel& model_at_theta, const Matrix& a,
                                              double draw);

/// One trajectory at theta = theta0 + u/sqrt(n_steps), started from the
/// stationary state of the true-parameter chain. Reproducible from
/// (master_seed, index).
TrajectoryRecord run_trajectory(const ChainModel& model, const TrajectoryConfig& config,
                                std::uint64_t index);

struct EstimateResult {
  double theta_hat = 0.0;
  bool clamped = false;  // abar fell outside the bracket's range of means
};

/// Inverts theta -> <A (x) 1>_theta by bisection to 1e-10. The map is
/// required to be strictly monotone on the bracket (checked by sampling).
EstimateResult estimate_theta(const ChainModel& model, const Matrix& a, double abar,
                              std::pair<double, double> bracket);

struct CltExperimentReport {
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;
  double target_mean = 0.0;      // mu(A) * u
  double target_variance = 0.0;  // sigma^2(A)
  double mean_standard_error = 0.0;
  double ks_distance = 0.0;
  double ks_critical_1pct = 0.0;
  bool pass_mean = false;
  bool pass_variance = false;  // within 10%
  bool pass_ks = false;
  long n_steps = 0;
  long n_trajectories = 0;
  double u = 0.0;
};

/// Monte Carlo check of the measurement central limit theorem: empirical law
/// of sqrt(n)(Abar_n - <A>_theta0) against N(mu u, sigma^2). The observable
/// is centered internally.
CltExperimentReport clt_experiment(const ChainModel& model, const TrajectoryConfig& config);

struct MseExperimentReport {
  double rescaled_mse = 0.0;    // n * mean((theta_hat - theta)^2)
  double target = 0.0;          // sigma^2 / mu^2
  double standard_error = 0.0;  // Monte Carlo SE of rescaled_mse
  long clamped_trajectories = 0;
  long n_steps = 0;
  long n_trajectories = 0;
  double u = 0.0;
};

/// Monte Carlo check of the estimator's rescaled mean square error against
/// the inverse classical Fisher information per probe.
MseExperimentReport mse_experiment(const ChainModel& model, const TrajectoryConfig& config,
                                   std::pair<double, double> bracket);

}  // namespace qmarkov
