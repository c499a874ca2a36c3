#pragma once
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "relloc/rng.hpp"
#include "relloc/spectra.hpp"

namespace relloc {

/// Relative-position wavefunction of the two particles in one dimension.
/// Real amplitude samples of c(x) on a uniform cell-centred grid over
/// [-d, d], with x in units of the reference wavelength. Cell centres are
/// built mirror-exactly (x_j == -x_{n-1-j} bitwise), which keeps parity
/// preservation exact in floating point; for even n the point x = 0 is
/// never a sample, so left/right half-space splits are unambiguous.
/// Normalisation contract: sum |c_j|^2 dx == 1 within 1e-9 after
/// construction and after every applied event.
struct Wavefunction1D {
  std::vector<double> amplitudes;
  double half_width = 0.0;  // d, in reference wavelengths

  int size() const { return static_cast<int>(amplitudes.size()); }
  double dx() const { return 2.0 * half_width / size(); }
  double x(int j) const;  // cell centre, mirror-exact

  /// L2 norm sqrt(sum c^2 dx).
  double norm() const;
  /// Divides by the current norm; throws degenerate_collapse_error if the
  /// norm is below 1e-300.
  void renormalize();
};

enum class EventKind { NonScattered, Scattered };

/// One photon-detection outcome: either the undeflected (nonscattered)
/// photon, or a scattering at angle theta in [0, 2*pi). The wavelength is
/// the photon's, in reference units.
struct ScatterOutcome1D {
  EventKind kind = EventKind::NonScattered;
  double theta = 0.0;
  double wavelength = 1.0;
};

template <class Outcome>
struct EventLog {
  std::uint64_t seed = 0;
  std::vector<Outcome> events;
  std::size_t photon_count() const { return events.size(); }
};
using EventLog1D = EventLog<ScatterOutcome1D>;

/// Number of uniform scattering-angle bins over [0, 2*pi) used by both the
/// nonscattering-amplitude quadrature and the angle sampler. Must be a
/// multiple of 4 (the integrands repeat over quadrants).
inline constexpr int kDefaultAngleBins = 4096;

/// Flat delocalised state c(x) = 1/sqrt(2d) on [-d, d].
/// Throws invalid_dimension_error for samples < 2 or half_width <= 0.
Wavefunction1D flat_state(double half_width, int samples);

/// Nonscattering amplitude
///   A(x) = sqrt( (1/2pi) Int_0^2pi sin^2((2 pi x / lambda) sin t) dt ),
/// evaluated by midpoint quadrature on the angle grid. A^2 agrees with the
/// closed form (1 - J0(4 pi x / lambda))/2 to well below 1e-8.
double nonscatter_amplitude(double x, double wavelength,
                            int angle_bins = kDefaultAngleBins);

/// Probability density for detecting a scattered photon at angle theta:
///   P_S(theta) = (1/2pi) Int |c(x)|^2 cos^2((2 pi x / lambda) sin theta) dx,
/// by quadrature on the state grid.
double scatter_density(const Wavefunction1D& state, double theta,
                       double wavelength);

/// P_NS = Int |c|^2 A^2 dx. Satisfies
/// P_NS + Int_0^2pi P_S(theta) dtheta = 1 within quadrature tolerance.
double nonscatter_probability(const Wavefunction1D& state, double wavelength,
                              int angle_bins = kDefaultAngleBins);

/// Per-event sampler: tabulates P_S on the angle bins for one state and
/// wavelength, then draws outcomes by inverse CDF (nonscattered branch
/// first, then linear interpolation within the chosen angle bin).
/// Immutable after construction; one RandomStream per caller.
class EventSampler1D {
 public:
  EventSampler1D(const Wavefunction1D& state, double wavelength,
                 int angle_bins = kDefaultAngleBins);
  /// Engine path: reuse a precomputed P_NS instead of the quadrature.
  EventSampler1D(const Wavefunction1D& state, double wavelength,
                 int angle_bins, double nonscatter_prob);

  ScatterOutcome1D draw(RandomStream& rng) const;

  /// Discretised-model probability of the nonscattered branch.
  double nonscatter_prob() const { return p_ns_; }
  /// P_S at the angle-bin midpoints (length angle_bins).
  const std::vector<double>& bin_density() const { return density_; }
  double bin_width() const { return bin_width_; }

 private:
  void build(const Wavefunction1D& state);
  double wavelength_;
  int bins_;
  double p_ns_ = 0.0;
  double bin_width_ = 0.0;
  std::vector<double> density_;
  std::vector<double> cdf_;  // scattered-branch CDF over bins
};

/// One-shot draw: NonScattered with probability P_NS, otherwise Scattered
/// with theta from P_S(theta)/(1 - P_NS). Builds a fresh sampler; use
/// EventSampler1D directly for repeated draws from the same state.
ScatterOutcome1D sample_event(const Wavefunction1D& state, double wavelength,
                              RandomStream& rng,
                              int angle_bins = kDefaultAngleBins);

/// Collapse rule: multiply the amplitudes pointwise by
/// cos((2 pi x / lambda) sin theta1) for a scattered photon, or by A(x) for
/// a nonscattered one, then renormalise.
/// Throws degenerate_collapse_error if the update annihilates the state.
Wavefunction1D apply_event(const Wavefunction1D& state,
                           const ScatterOutcome1D& event,
                           int angle_bins = kDefaultAngleBins);

struct LocalisationResult {
  Wavefunction1D state;
  EventLog1D log;
};

/// Repeated sample/apply driver with per-wavelength caches. One engine per
/// thread; states and logs it returns are value types and safe to move
/// across threads. Reusing an engine across runs on the same (grid,
/// source) skips rebuilding the nonscattering-amplitude tables.
class LocalisationEngine1D {
 public:
  LocalisationEngine1D(int samples, double half_width,
                       int angle_bins = kDefaultAngleBins);

  /// Flat start; draws one wavelength per photon from `source`.
  LocalisationResult run(int photons, const SpectralSource& source,
                         RandomStream& rng);
  /// Arbitrary initial state (copied).
  LocalisationResult run(const Wavefunction1D& initial, int photons,
                         const SpectralSource& source, RandomStream& rng);

  int samples() const { return samples_; }
  double half_width() const { return half_width_; }

 private:
  void prepare(const SpectralSource& source);
  double nonscatter_prob_cached(const Wavefunction1D& state,
                                double wavelength);
  void apply_in_place(Wavefunction1D& state, const ScatterOutcome1D& event);
  double a2_at(double x_abs, double wavelength) const;

  int samples_;
  double half_width_;
  int angle_bins_;
  // A^2 caches: exact per-grid-point table when the source is
  // monochromatic, scaled table in u = x/lambda otherwise.
  double mono_wavelength_ = 0.0;
  std::vector<double> a2_grid_;  // at |x| fold points
  std::vector<double> a2_u_;     // A^2(u) on a uniform u grid
  double u_step_ = 0.0;
};

/// sample/apply `photons` times from a fresh engine; convenience wrapper.
/// photons >= 0; fully reproducible from the stream's seed.
LocalisationResult run_localisation(const Wavefunction1D& initial, int photons,
                                    const SpectralSource& source,
                                    RandomStream& rng);

/// |c(x_j)|^2; integrates to 1 within 1e-9.
std::vector<double> position_density(const Wavefunction1D& state);

/// Normalised probability density Q(p) on a momentum grid, p in h/lambda.
struct MomentumDensity {
  std::vector<double> p;
  std::vector<double> q;
  double dp() const { return p.size() > 1 ? p[1] - p[0] : 0.0; }
};

/// Uniform symmetric grid of `points` nodes over [-p_max, p_max].
std::vector<double> uniform_momentum_grid(double p_max, int points);

/// Q(p_k) = |sum_j c(x_j) exp(-i 2 pi p_k x_j) dx|^2 on the requested grid
/// (direct transform), renormalised so sum Q dp = 1.
/// Throws invalid_grid_error unless p_grid is uniform and symmetric about 0.
MomentumDensity momentum_density(const Wavefunction1D& state,
                                 const std::vector<double>& p_grid);

enum class Side { Left, Right };

struct HalfMoments {
  double mass = 0.0;      // probability in the half-space
  double mean = 0.0;      // conditional mean of x
  double variance = 0.0;  // conditional variance of x
};

/// Moments of a position density restricted to x < 0 or x > 0 and
/// renormalised there (an odd centre cell at x == 0 belongs to neither).
/// Throws empty_half_error if the restricted mass is below 1e-12.
HalfMoments half_moments(std::span<const double> density, double half_width,
                         Side side);

/// Variance of x about the half's mean. Spec of the per-peak width used by
/// the variance-vs-photon-number scaling analysis.
double peak_variance(std::span<const double> density, double half_width,
                     Side side);

}  // namespace relloc
