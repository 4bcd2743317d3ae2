#include "qmarkov/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <thread>

namespace qmarkov {

namespace {

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal CDF.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Static partition across hardware threads; each index is independent and
// the result layout is fixed by index, so scheduling cannot change results.
void parallel_for(long count, const std::function<void(long)>& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || count < 4) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<long> next{0};
  for (unsigned t = 0; t < hw; ++t) {
    workers.emplace_back([&]() {
      long i;
      while ((i = next.fetch_add(1)) < count) body(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double TrajectoryConfig::theta_true() const {
  return theta0 + u / std::sqrt(static_cast<double>(n_steps));
}

SpectralDecomposition spectral_decomposition(const Matrix& a, double degeneracy_tol) {
  if (!is_hermitian(a, tol::validation))
    throw std::invalid_argument("spectral_decomposition: observable must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_decomposition: eigensolver failed");

  SpectralDecomposition decomp;
  const auto& vals = es.eigenvalues();
  Index i = 0;
  while (i < vals.size()) {
    Index j = i;
    while (j + 1 < vals.size() && vals(j + 1) - vals(j) <= degeneracy_tol) ++j;
    Matrix projector = Matrix::Zero(a.rows(), a.cols());
    double mean = 0.0;
    for (Index m = i; m <= j; ++m) {
      projector += es.eigenvectors().col(m) * es.eigenvectors().col(m).adjoint();
      mean += vals(m);
    }
    decomp.values.push_back(mean / static_cast<double>(j - i + 1));
    decomp.projectors.push_back(std::move(projector));
    i = j + 1;
  }
  return decomp;
}

MeasurementProcess::MeasurementProcess(const ChainModel& model_at_theta, const Matrix& a)
    : decomp_(spectral_decomposition(a)), k_(model_at_theta.k) {
  const Index d = model_at_theta.d, k = model_at_theta.k;
  if (a.rows() != d || a.cols() != d)
    throw std::invalid_argument("MeasurementProcess: observable must act on the probe");
  const Matrix injected =
      model_at_theta.unitary() * kron(Matrix(model_at_theta.input_state.amplitudes),
                                      Matrix::Identity(k, k));  // dk x k
  blocks_.resize(decomp_.values.size());
  for (std::size_t out = 0; out < decomp_.values.size(); ++out) {
    blocks_[out].resize(d, Matrix::Zero(k, k));
    for (Index j = 0; j < d; ++j) {
      for (Index l = 0; l < d; ++l)
        blocks_[out][j] += decomp_.projectors[out](j, l) * injected.block(l * k, 0, k, k);
    }
  }
}

std::pair<double, Matrix> MeasurementProcess::step(const Matrix& rho, double draw) const {
  const std::size_t outcomes = blocks_.size();
  std::vector<double> probs(outcomes);
  double total = 0.0;
  for (std::size_t i = 0; i < outcomes; ++i) {
    double p = 0.0;
    for (const Matrix& s : blocks_[i]) p += (s * rho).cwiseProduct(s.conjugate()).sum().real();
    probs[i] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > tol::algebraic)
    throw std::runtime_error("measure_step: outcome probabilities sum to " + std::to_string(total));

  std::size_t selected = outcomes - 1;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < outcomes; ++i) {
    cumulative += probs[i];
    if (draw < cumulative) {
      selected = i;
      break;
    }
  }
  if (probs[selected] < 1e-14) {
    // Pathological draw landed in roundoff mass; renormalization guard.
    selected = static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
  }

  Matrix post = Matrix::Zero(k_, k_);
  for (const Matrix& s : blocks_[selected]) post += s * rho * s.adjoint();
  post /= probs[selected];
  post /= post.trace().real();  // keep the invariant exact against drift
  return {decomp_.values[selected], std::move(post)};
}

std::pair<double, DensityMatrix> measure_step(const DensityMatrix& rho,
                                              const ChainModel& model_at_theta, const Matrix& a,
                                              double draw) {
  MeasurementProcess process(model_at_theta, a);
  auto [outcome, post] = process.step(rho.rho, draw);
  return {outcome, DensityMatrix(hermitize(post))};
}

namespace {

struct EnsembleSetup {
  ChainModel model_true;
  DensityMatrix initial;
  MeasurementProcess process;

  EnsembleSetup(const ChainModel& model, const TrajectoryConfig& config)
      : model_true(model.at_theta(config.theta_true())),
        initial(DensityMatrix::maximally_mixed(model.k)),
        process(model_true, config.observable) {
    const SpectralReport report = spectral_report(model_true);
    if (!report.mixing)
      throw NonMixingError("run_trajectory: the chain at the true parameter is not mixing, "
                           "no stationary state to start from");
    initial = report.stationary_state;
  }

  double time_average(const TrajectoryConfig& config, std::uint64_t index,
                      std::vector<double>* outcomes, Matrix* final_state) const {
    std::mt19937_64 gen(split_seed(config.master_seed, index));
    Matrix rho = initial.rho;
    double sum = 0.0;
    for (long step = 0; step < config.n_steps; ++step) {
      auto [outcome, post] = process.step(rho, uniform01(gen));
      sum += outcome;
      rho = std::move(post);
      if (outcomes) outcomes->push_back(outcome);
    }
    if (final_state) *final_state = std::move(rho);
    return sum / static_cast<double>(config.n_steps);
  }
};

}  // namespace

TrajectoryRecord run_trajectory(const ChainModel& model, const TrajectoryConfig& config,
                                std::uint64_t index) {
  if (config.n_steps < 1) throw std::invalid_argument("run_trajectory: n_steps must be >= 1");
  EnsembleSetup setup(model, config);
  TrajectoryRecord record{std::vector<double>{}, 0.0, DensityMatrix::maximally_mixed(model.k)};
  record.outcomes.reserve(config.n_steps);
  Matrix final_state;
  record.time_average = setup.time_average(config, index, &record.outcomes, &final_state);
  record.final_state = DensityMatrix(hermitize(final_state));
  return record;
}

namespace {

double stationary_mean(const ChainModel& model, const Matrix& a, double theta) {
  return stationary_expectation_real(model.at_theta(theta),
                                     kron(a, Matrix::Identity(model.k, model.k)));
}

void check_monotone(const ChainModel& model, const Matrix& a, std::pair<double, double> bracket) {
  constexpr int kSamples = 33;
  if (!(bracket.second > bracket.first))
    throw std::invalid_argument("estimate_theta: bracket must satisfy lo < hi");
  double prev = stationary_mean(model, a, bracket.first);
  const double second = stationary_mean(
      model, a, bracket.first + (bracket.second - bracket.first) / (kSamples - 1));
  const double direction = second - prev;
  for (int i = 1; i < kSamples; ++i) {
    const double theta =
        bracket.first + (bracket.second - bracket.first) * i / static_cast<double>(kSamples - 1);
    const double value = stationary_mean(model, a, theta);
    if ((value - prev) * direction <= 0.0)
      throw std::invalid_argument(
          "estimate_theta: <A>_theta is not strictly monotone on the bracket");
    prev = value;
  }
}

EstimateResult bisect_theta(const ChainModel& model, const Matrix& a, double abar,
                            std::pair<double, double> bracket) {
  double lo = bracket.first, hi = bracket.second;
  double g_lo = stationary_mean(model, a, lo);
  double g_hi = stationary_mean(model, a, hi);
  const double g_min = std::min(g_lo, g_hi), g_max = std::max(g_lo, g_hi);
  if (abar <= g_min || abar >= g_max) {
    // Out of range: clamp to the nearer endpoint and flag it.
    const bool nearer_lo = std::abs(abar - g_lo) <= std::abs(abar - g_hi);
    return {nearer_lo ? lo : hi, true};
  }
  const bool increasing = g_hi > g_lo;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = stationary_mean(model, a, mid);
    if ((g_mid < abar) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  return {0.5 * (lo + hi), false};
}

}  // namespace

EstimateResult estimate_theta(const ChainModel& model, const Matrix& a, double abar,
                              std::pair<double, double> bracket) {
  check_monotone(model, a, bracket);
  return bisect_theta(model, a, abar, bracket);
}

CltExperimentReport clt_experiment(const ChainModel& model, const TrajectoryConfig& config) {
  if (config.n_trajectories < 2)
    throw std::invalid_argument("clt_experiment: need at least two trajectories");
  const CltParameters params = clt_parameters(model.at_theta(config.theta0), config.observable);

  TrajectoryConfig centered_config = config;
  centered_config.observable = params.centered_observable;
  EnsembleSetup setup(model, centered_config);

  const long m = config.n_trajectories;
  const double root_n = std::sqrt(static_cast<double>(config.n_steps));
  std::vector<double> samples(m);
  parallel_for(m, [&](long i) {
    samples[i] = root_n * setup.time_average(centered_config, static_cast<std::uint64_t>(i),
                                             nullptr, nullptr);
  });

  CltExperimentReport report;
  report.n_steps = config.n_steps;
  report.n_trajectories = m;
  report.u = config.u;
  report.target_mean = params.mu * config.u;
  report.target_variance = params.sigma2;

  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(m - 1);
  report.empirical_mean = mean;
  report.empirical_variance = var;
  report.mean_standard_error = std::sqrt(var / static_cast<double>(m));

  // One-sample Kolmogorov-Smirnov distance against the exact target normal
  // law (not a fitted one).
  std::sort(samples.begin(), samples.end());
  const double sigma = std::sqrt(params.sigma2);
  double ks = 0.0;
  for (long i = 0; i < m; ++i) {
    const double cdf = normal_cdf((samples[i] - report.target_mean) / sigma);
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i + 1) / m));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / m));
  }
  report.ks_distance = ks;
  report.ks_critical_1pct = 1.62762 / std::sqrt(static_cast<double>(m));

  report.pass_mean =
      std::abs(report.empirical_mean - report.target_mean) <= 4.0 * report.mean_standard_error;
  report.pass_variance =
      std::abs(report.empirical_variance - report.target_variance) <= 0.1 * report.target_variance;
  report.pass_ks = report.ks_distance <= report.ks_critical_1pct;
  return report;
}

MseExperimentReport mse_experiment(const ChainModel& model, const TrajectoryConfig& config,
                                   std::pair<double, double> bracket) {
  if (config.n_trajectories < 2)
    throw std::invalid_argument("mse_experiment: need at least two trajectories");
  const CltParameters params = clt_parameters(model.at_theta(config.theta0), config.observable);
  if (std::abs(params.mu) < 1e-12)
    throw std::invalid_argument("mse_experiment: mu(A) = 0, the estimator carries no signal");
  check_monotone(model, config.observable, bracket);

  EnsembleSetup setup(model, config);
  const long m = config.n_trajectories;
  const double n = static_cast<double>(config.n_steps);
  const double theta_true = config.theta_true();

  std::vector<double> losses(m);
  std::vector<char> clamped(m, 0);
  parallel_for(m, [&](long i) {
    const double abar =
        setup.time_average(config, static_cast<std::uint64_t>(i), nullptr, nullptr);
    const EstimateResult est = bisect_theta(model, config.observable, abar, bracket);
    clamped[i] = est.clamped ? 1 : 0;
    const double err = est.theta_hat - theta_true;
    losses[i] = n * err * err;
  });

  MseExperimentReport report;
  report.n_steps = config.n_steps;
  report.n_trajectories = m;
  report.u = config.u;
  report.target = params.sigma2 / (params.mu * params.mu);
  double mean = 0.0;
  for (double l : losses) mean += l;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double l : losses) var += (l - mean) * (l - mean);
  var /= static_cast<double>(m - 1);
  report.rescaled_mse = mean;
  report.standard_error = std::sqrt(var / static_cast<double>(m));
  for (char c : clamped) report.clamped_trajectories += c;
  return report;
}

}  // namespace qmarkov
