#include "relloc/tof.hpp"

#include "relloc/errors.hpp"

namespace relloc {

namespace {
constexpr double kPlanckH = 6.62607015e-34;        // J s
constexpr double kAtomicMassKg = 1.66053906660e-27;  // kg
}  // namespace

TofResult tof_resolution(const TofParameters& params, double p_max) {
  if (!(params.atom_mass_u > 0.0))
    throw invalid_parameter_error("tof: atom mass must be positive");
  if (!(params.photon_wavelength_m > 0.0))
    throw invalid_parameter_error("tof: wavelength must be positive");
  if (!(params.detector_length_m > 0.0))
    throw invalid_parameter_error("tof: detector length must be positive");
  if (params.flight_time_s < 0.0)
    throw invalid_parameter_error("tof: flight time must be nonnegative");
  if (params.momentum_resolution < 0.0)
    throw invalid_parameter_error("tof: momentum resolution must be nonnegative");

  const double mass_kg = params.atom_mass_u * kAtomicMassKg;
  const double unit_momentum = kPlanckH / params.photon_wavelength_m;
  TofResult out;
  out.displacement_per_unit_momentum_m =
      unit_momentum * params.flight_time_s / mass_kg;
  out.spatial_resolution_m =
      params.momentum_resolution * out.displacement_per_unit_momentum_m;
  out.max_displacement_m = p_max * out.displacement_per_unit_momentum_m;
  out.fits_detector = out.max_displacement_m <= params.detector_length_m;
  return out;
}

}  // namespace relloc
