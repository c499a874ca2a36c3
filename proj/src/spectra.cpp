#include "relloc/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "relloc/errors.hpp"

namespace relloc {
namespace {

constexpr double kPlanckH = 6.62607015e-34;     // J s
constexpr double kSpeedOfLight = 2.99792458e8;  // m/s
constexpr double kBoltzmann = 1.380649e-23;     // J/K
constexpr double kWienB = 2.897771955e-3;       // m K
// hc/kB, the exponent scale of the Planck factor
constexpr double kC2 = kPlanckH * kSpeedOfLight / kBoltzmann;

// Dimensionless spectral mass t^3/(e^t - 1) with t = c2/(lambda T).
// Integrating over t from 0 to infinity gives pi^4/15; the truncation
// band is chosen from quantiles of this one-parameter family, so it only
// has to be tabulated once per construction.
double reduced_mass(double t) {
  if (t < 1e-12) return t * t;  // t^3/(e^t-1) -> t^2
  if (t > 700.0) return 0.0;
  return t * t * t / std::expm1(t);
}

struct ReducedCdf {
  std::vector<double> t, cum;  // cumulative mass up to t
};

ReducedCdf tabulate_reduced_cdf() {
  // Integrand decays like t^3 e^-t; [0, 60] holds all representable mass.
  constexpr int n = 60000;
  constexpr double t_max = 60.0;
  ReducedCdf out;
  out.t.resize(n + 1);
  out.cum.resize(n + 1);
  const double dt = t_max / n;
  double acc = 0.0;
  out.t[0] = 0.0;
  out.cum[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += reduced_mass((i + 0.5) * dt) * dt;  // midpoint rule
    out.t[i + 1] = (i + 1) * dt;
    out.cum[i + 1] = acc;
  }
  return out;
}

// t such that cumulative reduced mass equals `target` (linear inverse).
double reduced_quantile(const ReducedCdf& cdf, double target) {
  auto it = std::lower_bound(cdf.cum.begin(), cdf.cum.end(), target);
  if (it == cdf.cum.begin()) return cdf.t.front();
  if (it == cdf.cum.end()) return cdf.t.back();
  const std::size_t i = static_cast<std::size_t>(it - cdf.cum.begin());
  const double c0 = cdf.cum[i - 1], c1 = cdf.cum[i];
  const double w = c1 > c0 ? (target - c0) / (c1 - c0) : 0.5;
  return cdf.t[i - 1] + w * (cdf.t[i] - cdf.t[i - 1]);
}

}  // namespace

double planck_energy_density(double wavelength_m, double temperature_k) {
  const double x = kC2 / (wavelength_m * temperature_k);
  if (x > 700.0) return 0.0;
  const double l2 = wavelength_m * wavelength_m;
  return 1.0 / (l2 * l2 * wavelength_m * std::expm1(x));
}

double wien_peak_wavelength(double temperature_k) {
  return kWienB / temperature_k;
}

SpectralSource SpectralSource::monochromatic(double wavelength) {
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("monochromatic source: wavelength <= 0");
  SpectralSource s;
  s.fixed_wavelength_ = wavelength;
  s.min_wavelength_ = s.max_wavelength_ = wavelength;
  return s;
}

SpectralSource SpectralSource::blackbody(double temperature_k,
                                         double reference_wavelength_m,
                                         double coverage,
                                         BlackbodyWeighting weighting) {
  if (!(temperature_k > 0.0))
    throw invalid_parameter_error("blackbody source: temperature <= 0");
  if (!(reference_wavelength_m > 0.0))
    throw invalid_parameter_error("blackbody source: reference wavelength <= 0");
  if (!(coverage > 0.0 && coverage < 1.0))
    throw invalid_parameter_error("blackbody source: coverage outside (0,1)");

  // Quantiles of the reduced spectrum give the truncation band: the tail
  // mass outside [lambda_min, lambda_max] is (1-coverage)/2 on each side.
  // Short wavelengths correspond to large t = c2/(lambda T).
  const ReducedCdf cdf = tabulate_reduced_cdf();
  const double total = cdf.cum.back();
  const double tail = 0.5 * (1.0 - coverage) * total;
  const double t_lo = reduced_quantile(cdf, tail);
  const double t_hi = reduced_quantile(cdf, total - tail);
  const double a = kC2 / temperature_k;

  SpectralSource s;
  s.temperature_k_ = temperature_k;
  s.reference_m_ = reference_wavelength_m;
  s.band_min_m_ = a / t_hi;
  s.band_max_m_ = a / t_lo;

  constexpr int kTableCells = 4096;
  const double dl = (s.band_max_m_ - s.band_min_m_) / kTableCells;
  std::vector<double> weights(kTableCells);
  for (int i = 0; i < kTableCells; ++i) {
    const double lambda = s.band_min_m_ + (i + 0.5) * dl;
    double w = planck_energy_density(lambda, temperature_k);
    if (weighting == BlackbodyWeighting::PhotonCount) w *= lambda;
    weights[i] = w;
  }
  s.sampler_ =
      std::make_shared<CellSampler>(std::move(weights), s.band_min_m_, dl);
  s.min_wavelength_ = s.band_min_m_ / reference_wavelength_m;
  s.max_wavelength_ = s.band_max_m_ / reference_wavelength_m;
  return s;
}

double SpectralSource::draw(RandomStream& rng) const {
  if (!sampler_) return fixed_wavelength_;
  return sampler_->draw(rng) / reference_m_;
}

double SpectralSource::wavelength_at(double u) const {
  if (!sampler_) return fixed_wavelength_;
  return sampler_->value_at(u) / reference_m_;
}

const std::vector<double>& SpectralSource::cdf() const {
  static const std::vector<double> kEmpty;
  return sampler_ ? sampler_->cdf() : kEmpty;
}

}  // namespace relloc
