#include "relloc/discriminator.hpp"

#include <algorithm>
#include <cmath>

#include "relloc/errors.hpp"
#include "relloc/parallel.hpp"
#include "relloc/sampling.hpp"

namespace relloc {
namespace {

double interp_clamped(const MomentumDensity& d, double p) {
  const int n = static_cast<int>(d.p.size());
  const double dp = d.dp();
  double t = (p - d.p.front()) / dp;
  t = std::clamp(t, 0.0, static_cast<double>(n - 1));
  const int k = std::min(static_cast<int>(t), n - 2);
  const double u = t - k;
  return d.q[k] + u * (d.q[k + 1] - d.q[k]);
}

}  // namespace

HypothesisDensities build_hypotheses(const Wavefunction1D& final_state,
                                     const std::vector<double>& p_grid) {
  HypothesisDensities hyp;
  hyp.q1 = momentum_density(final_state, p_grid);

  Wavefunction1D half = final_state;
  double right_mass = 0.0;
  const double dx = half.dx();
  for (int j = 0; j < half.size(); ++j) {
    if (half.x(j) > 0.0) {
      right_mass += half.amplitudes[j] * half.amplitudes[j] * dx;
    } else {
      half.amplitudes[j] = 0.0;
    }
  }
  if (right_mass < 1e-12)
    throw empty_half_error("build_hypotheses: x > 0 mass below 1e-12");
  half.renormalize();
  hyp.q2 = momentum_density(half, p_grid);
  return hyp;
}

MomentumDensity convolve_resolution(const MomentumDensity& density,
                                    double dp) {
  if (dp < 0.0)
    throw invalid_parameter_error("convolve_resolution: dp < 0");
  if (dp == 0.0) return density;
  const int n = static_cast<int>(density.q.size());
  const double grid_dp = density.dp();
  const int reach = static_cast<int>(std::ceil(6.0 * dp / grid_dp));
  std::vector<double> kernel(2 * reach + 1);
  double ksum = 0.0;
  for (int m = -reach; m <= reach; ++m) {
    const double t = m * grid_dp / dp;
    kernel[m + reach] = std::exp(-0.5 * t * t);
    ksum += kernel[m + reach];
  }
  for (double& k : kernel) k /= ksum;

  MomentumDensity out;
  out.p = density.p;
  out.q.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    const int lo = std::max(-reach, k - (n - 1));
    const int hi = std::min(reach, k);
    for (int m = lo; m <= hi; ++m) acc += kernel[m + reach] * density.q[k - m];
    out.q[k] = acc;
  }
  double total = 0.0;
  for (const double q : out.q) total += q * grid_dp;
  if (total > 0.0)
    for (double& q : out.q) q /= total;
  return out;
}

double bayes_update(double prior_nl, double p1,
                    const HypothesisDensities& hyp) {
  if (!(prior_nl >= 0.0 && prior_nl <= 1.0))
    throw invalid_parameter_error("bayes_update: prior outside [0,1]");
  if (prior_nl == 0.0) return 0.0;
  if (prior_nl == 1.0) return 1.0;
  const double q1 = interp_clamped(hyp.q1, p1);
  const double q2 = interp_clamped(hyp.q2, p1);
  if (q1 < 1e-300 && q2 < 1e-300)
    throw zero_likelihood_error(
        "bayes_update: both likelihoods underflow at the measured momentum");
  const double a = q1 * prior_nl;
  const double b = q2 * (1.0 - prior_nl);
  return a / (a + b);
}

PosteriorTrace simulate_experiment(Truth truth, int runs, int photons,
                                   double dp, const SpectralSource& source,
                                   RandomStream& rng,
                                   const ExperimentConfig& config) {
  if (runs < 1)
    throw invalid_parameter_error("simulate_experiment: runs < 1");
  if (dp < 0.0)
    throw invalid_parameter_error("simulate_experiment: dp < 0");
  const std::vector<double> p_grid =
      uniform_momentum_grid(config.p_max, config.momentum_points);
  LocalisationEngine1D engine(config.grid_samples, config.half_width,
                              config.angle_bins);
  PosteriorTrace trace;
  trace.truth = truth;
  trace.resolution = dp;
  trace.p_nl.reserve(static_cast<std::size_t>(runs) + 1);
  trace.p_nl.push_back(0.5);
  for (int r = 0; r < runs; ++r) {
    const LocalisationResult run = engine.run(photons, source, rng);
    const HypothesisDensities hyp = build_hypotheses(run.state, p_grid);
    const MomentumDensity& gen =
        truth == Truth::Delocalised ? hyp.q1 : hyp.q2;
    const double grid_dp = gen.dp();
    const CellSampler momentum_sampler(gen.q, gen.p.front() - 0.5 * grid_dp,
                                       grid_dp);
    double p1 = momentum_sampler.draw(rng);
    double posterior;
    if (dp > 0.0) {
      p1 += dp * rng.gaussian();
      const HypothesisDensities blurred{convolve_resolution(hyp.q1, dp),
                                        convolve_resolution(hyp.q2, dp)};
      posterior = bayes_update(trace.p_nl.back(), p1, blurred);
    } else {
      posterior = bayes_update(trace.p_nl.back(), p1, hyp);
    }
    trace.p_nl.push_back(posterior);
  }
  return trace;
}

std::vector<PosteriorTrace> experiment_batch(Truth truth, int experiments,
                                             int runs, int photons, double dp,
                                             const SpectralSource& source,
                                             std::uint64_t master_seed,
                                             const ExperimentConfig& config,
                                             unsigned threads) {
  if (experiments < 1)
    throw invalid_parameter_error("experiment_batch: experiments < 1");
  std::vector<PosteriorTrace> traces(static_cast<std::size_t>(experiments));
  parallel_for_index(
      traces.size(),
      [&](std::size_t i) {
        RandomStream stream = RandomStream::derived(master_seed, i);
        traces[i] =
            simulate_experiment(truth, runs, photons, dp, source, stream,
                                config);
      },
      threads);
  return traces;
}

std::vector<double> mean_trace(const std::vector<PosteriorTrace>& traces) {
  if (traces.empty())
    throw invalid_parameter_error("mean_trace: no traces");
  std::vector<double> mean(traces.front().p_nl.size(), 0.0);
  for (const auto& t : traces)
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += t.p_nl[k];
  for (double& m : mean) m /= static_cast<double>(traces.size());
  return mean;
}

std::vector<double> average_experiments(Truth truth, int experiments,
                                        int runs, int photons, double dp,
                                        const SpectralSource& source,
                                        std::uint64_t master_seed,
                                        const ExperimentConfig& config,
                                        unsigned threads) {
  return mean_trace(experiment_batch(truth, experiments, runs, photons, dp,
                                     source, master_seed, config, threads));
}

}  // namespace relloc
