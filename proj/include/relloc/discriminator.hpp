#pragma once
#include <cstdint>
#include <vector>

#include "relloc/rng.hpp"
#include "relloc/spectra.hpp"
#include "relloc/wave1d.hpp"

namespace relloc {

/// The two relative-momentum hypothesis densities of one run, on a shared
/// grid: q1 for the delocalised/induced-localisation case (fringed), q2
/// for the pre-localised mixture (same envelope, no fringes). Both are
/// nonnegative and normalised on the grid.
struct HypothesisDensities {
  MomentumDensity q1;
  MomentumDensity q2;
};

/// q1 is the momentum density of the full two-peak state. q2 is the
/// momentum density of the single-peak component: the state restricted to
/// x > 0 and renormalised - the equal-weight mixture of the two mirror
/// peaks has the same momentum density as either one alone.
/// Throws empty_half_error if the x > 0 mass is below 1e-12.
HypothesisDensities build_hypotheses(const Wavefunction1D& final_state,
                                     const std::vector<double>& p_grid);

/// Discrete convolution with a Gaussian of standard deviation dp (kernel
/// truncated at +-6 dp), renormalised; dp == 0 returns the input unchanged.
MomentumDensity convolve_resolution(const MomentumDensity& density, double dp);

/// One Bayes step: posterior probability of "not initially localised",
///   Q1(p1) prior / (Q1(p1) prior + Q2(p1) (1 - prior)),
/// with both densities linearly interpolated at p1 (clamped to the grid).
/// Priors 0 and 1 are absorbing. Throws zero_likelihood_error if both
/// interpolated densities are below 1e-300.
double bayes_update(double prior_nl, double p1,
                    const HypothesisDensities& hyp);

enum class Truth { Delocalised, Localised };

/// Posterior sequence of one simulated experiment: p_nl[0] is the 0.5
/// prior, followed by one entry per run; P_l = 1 - P_nl throughout.
struct PosteriorTrace {
  Truth truth = Truth::Delocalised;
  double resolution = 0.0;  // dp in h/lambda; 0 = perfect measurement
  std::vector<double> p_nl;
  int runs() const { return static_cast<int>(p_nl.size()) - 1; }
};

/// Grid and transform defaults shared by every run of an experiment.
struct ExperimentConfig {
  int grid_samples = 2048;
  double half_width = 1.0;
  double p_max = 8.0;
  int momentum_points = 1025;
  int angle_bins = kDefaultAngleBins;
};

/// One experiment of `runs` repetitions. Each run: fresh flat state,
/// `photons` scattering events, hypothesis densities from the final state,
/// one momentum measurement drawn from the truth's density (plus Gaussian
/// noise of width dp, with the dp-convolved densities used as likelihoods
/// when dp > 0), then a Bayes update of the running posterior.
PosteriorTrace simulate_experiment(Truth truth, int runs, int photons,
                                   double dp, const SpectralSource& source,
                                   RandomStream& rng,
                                   const ExperimentConfig& config = {});

/// Independent experiments with per-index derived streams; deterministic
/// for a given master seed regardless of thread count.
std::vector<PosteriorTrace> experiment_batch(Truth truth, int experiments,
                                             int runs, int photons, double dp,
                                             const SpectralSource& source,
                                             std::uint64_t master_seed,
                                             const ExperimentConfig& config = {},
                                             unsigned threads = 0);

/// Mean P_nl across experiments at each run index (length runs + 1).
std::vector<double> average_experiments(Truth truth, int experiments,
                                        int runs, int photons, double dp,
                                        const SpectralSource& source,
                                        std::uint64_t master_seed,
                                        const ExperimentConfig& config = {},
                                        unsigned threads = 0);

/// Mean of per-run traces at each index (helper for batch statistics).
std::vector<double> mean_trace(const std::vector<PosteriorTrace>& traces);

}  // namespace relloc
