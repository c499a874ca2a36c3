#pragma once
#include <memory>
#include <vector>

#include "relloc/rng.hpp"
#include "relloc/sampling.hpp"

namespace relloc {

/// Spectral weighting of the blackbody draw. Energy density u_lambda is
/// the default; the photon-number variant (u_lambda * lambda / hc) is kept
/// as a sensitivity knob.
enum class BlackbodyWeighting { EnergyDensity, PhotonCount };

/// Photon-wavelength source for scattering events. draw() returns the
/// wavelength in units of the simulation's reference wavelength, which is
/// what the collapse phase 2*pi*x/lambda consumes. Immutable after
/// construction and safe to share across threads.
class SpectralSource {
 public:
  /// Fixed wavelength, already expressed in reference-wavelength units.
  static SpectralSource monochromatic(double wavelength);

  /// Planck spectrum at temperature_k, truncated to the wavelength band
  /// [lambda_min, lambda_max] (metres) that captures at least `coverage`
  /// of the untruncated spectral mass, then tabulated as a 4096-point CDF.
  /// `reference_wavelength_m` converts drawn wavelengths to reference units.
  static SpectralSource blackbody(
      double temperature_k, double reference_wavelength_m,
      double coverage = 0.999,
      BlackbodyWeighting weighting = BlackbodyWeighting::EnergyDensity);

  bool is_monochromatic() const { return !sampler_; }

  /// Wavelength for the next scattering event, in reference units.
  double draw(RandomStream& rng) const;

  /// Deterministic inverse-CDF evaluation (monotone in u); reference units.
  double wavelength_at(double u) const;

  /// Band of possible draws, in reference units (min == max when
  /// monochromatic).
  double min_wavelength() const { return min_wavelength_; }
  double max_wavelength() const { return max_wavelength_; }

  /// Blackbody truncation band in metres; 0 for monochromatic sources.
  double band_min_m() const { return band_min_m_; }
  double band_max_m() const { return band_max_m_; }
  double temperature_k() const { return temperature_k_; }

  /// CDF table at cell edges (monotone, 0 to 1); empty when monochromatic.
  const std::vector<double>& cdf() const;

 private:
  SpectralSource() = default;

  double fixed_wavelength_ = 0.0;
  double min_wavelength_ = 0.0, max_wavelength_ = 0.0;
  double band_min_m_ = 0.0, band_max_m_ = 0.0;
  double temperature_k_ = 0.0;
  double reference_m_ = 0.0;
  std::shared_ptr<const CellSampler> sampler_;  // metres; null if mono
};

/// Planck spectral energy density u_lambda, W m^-4 scale factors dropped.
double planck_energy_density(double wavelength_m, double temperature_k);

/// Wien displacement peak b/T in metres (b = 2.897771955e-3 m K).
double wien_peak_wavelength(double temperature_k);

}  // namespace relloc
