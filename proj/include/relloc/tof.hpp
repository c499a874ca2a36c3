#pragma once

namespace relloc {

/// Time-of-flight apparatus parameters for converting a relative-momentum
/// resolution requirement into a detector spatial resolution.
struct TofParameters {
  double atom_mass_u = 87.0;            // atomic mass units
  double photon_wavelength_m = 400e-9;  // metres
  double flight_time_s = 5e-3;          // seconds
  double detector_length_m = 10e-3;     // metres
  double momentum_resolution = 0.5;     // dp in h/lambda
};

struct TofResult {
  /// Free-flight displacement separation matching dp: (dp h/lambda) t / m.
  double spatial_resolution_m = 0.0;
  /// Displacement per unit momentum (1 h/lambda): h t / (lambda m).
  double displacement_per_unit_momentum_m = 0.0;
  /// Displacement at momentum p_max, for sanity against the detector span.
  double max_displacement_m = 0.0;
  bool fits_detector = false;
};

/// Throws invalid_parameter_error for non-positive mass, wavelength or
/// detector length, or negative time/resolution. p_max is the largest
/// relative momentum (h/lambda) the detector is expected to resolve.
TofResult tof_resolution(const TofParameters& params, double p_max = 8.0);

}  // namespace relloc
