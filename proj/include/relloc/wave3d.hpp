#pragma once
#include <array>
#include <cstddef>
#include <vector>

#include "relloc/rng.hpp"
#include "relloc/spectra.hpp"
#include "relloc/wave1d.hpp"  // EventKind, EventLog, MomentumDensity

namespace relloc {

/// Relative-position wavefunction on a uniform n^3 cell-centred grid over
/// [-d, d]^3, real amplitudes, x/y/z in reference wavelengths. Axis
/// coordinates are mirror-exact (coord(i) == -coord(n-1-i) bitwise), and
/// every collapse multiplier is evaluated so that inversion symmetry of an
/// even density survives in floating point. The data model carries only
/// the relative coordinate; there is no centre-of-mass field anywhere.
/// Normalisation: sum |c|^2 dV == 1 within 1e-8 after every event.
struct Wavefunction3D {
  std::vector<double> amplitudes;  // (ix*n + iy)*n + iz
  int n = 0;
  double half_width = 0.0;

  double dx() const { return 2.0 * half_width / n; }
  double coord(int i) const;
  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * n + iy) * n + iz;
  }
  double norm() const;
  void renormalize();
};

struct ScatterOutcome3D {
  EventKind kind = EventKind::NonScattered;
  double theta = 0.0;  // polar, [0, pi]
  double phi = 0.0;    // azimuthal, [0, 2 pi)
  double wavelength = 1.0;
};
using EventLog3D = EventLog<ScatterOutcome3D>;

/// Midpoint angle grid on the sphere: n_theta bins over [0, pi] and n_phi
/// bins over [0, 2 pi), solid-angle weight sin(theta) dtheta dphi.
struct AngleGrid3D {
  int n_theta = 128;
  int n_phi = 256;
};

/// Flat state c = (2d)^(-3/2) on the cube.
Wavefunction3D flat_state_3d(double half_width, int samples_per_axis);

/// Gamma_{x,y,z}(theta, phi) =
///   x sin(theta) cos(phi) + y sin(theta) sin(phi) + z (cos(theta) - 1).
/// (lambda/h times the momentum kick dotted with the relative coordinate.)
double gamma_kernel(double x, double y, double z, double theta, double phi);

/// A(x,y,z) with
///   A^2 = (1/4pi) Int sin(t) sin^2((2 pi/lambda) Gamma(t,p)) dt dp,
/// by midpoint quadrature over the angle grid.
double nonscatter_amplitude_3d(double x, double y, double z, double wavelength,
                               const AngleGrid3D& angles = {});

/// Per-solid-angle density of detecting a scattered photon at (theta, phi):
///   P_S = (1/4pi) Int |c|^2 cos^2((2 pi/lambda) Gamma) dV  (exact sum).
double scatter_density_3d(const Wavefunction3D& state, double theta,
                          double phi, double wavelength);

/// Nonscattering amplitude tabulated over the whole grid for one
/// wavelength: exactly the angle-grid quadrature of
/// nonscatter_amplitude_3d, evaluated for all cells by separable
/// accumulation. Event-independent, immutable, shareable across threads.
class NonscatterField3D {
 public:
  NonscatterField3D(int n, double half_width, double wavelength,
                    const AngleGrid3D& angles = {});

  double wavelength() const { return wavelength_; }
  int samples() const { return n_; }
  double half_width() const { return half_width_; }
  const std::vector<double>& a2() const { return a2_; }
  const std::vector<double>& a() const { return a_; }

  /// P_NS = Int |c|^2 A^2 dV for a state on the matching grid.
  double nonscatter_probability(const Wavefunction3D& state) const;

 private:
  int n_;
  double half_width_, wavelength_;
  std::vector<double> a2_, a_;
};

/// P_NS by quadrature (builds a fresh field; prefer NonscatterField3D when
/// evaluating several states on one grid).
double nonscatter_probability_3d(const Wavefunction3D& state,
                                 double wavelength,
                                 const AngleGrid3D& angles = {});

/// Tabulates P_S over the angle grid for one state and wavelength, then
/// draws outcomes by inverse CDF over the flattened (theta, phi) bins with
/// sin(theta) weights; positions within a bin are uniform.
class EventSampler3D {
 public:
  EventSampler3D(const Wavefunction3D& state, double wavelength,
                 const NonscatterField3D& field, const AngleGrid3D& angles = {});

  ScatterOutcome3D draw(RandomStream& rng) const;

  double nonscatter_prob() const { return p_ns_; }
  /// P_S at bin midpoints, row-major theta-major [i * n_phi + k].
  const std::vector<double>& bin_density() const { return density_; }
  const AngleGrid3D& angles() const { return angles_; }

 private:
  AngleGrid3D angles_;
  double wavelength_;
  double p_ns_ = 0.0;
  std::vector<double> density_;
  std::vector<double> cdf_;  // flattened scattered-branch CDF
};

ScatterOutcome3D sample_event_3d(const Wavefunction3D& state,
                                 double wavelength, RandomStream& rng,
                                 const AngleGrid3D& angles = {});

/// Pointwise collapse: cos((2 pi/lambda) Gamma(theta1, phi1)) for a
/// scattered photon, A(x,y,z) for a nonscattered one, then renormalise.
Wavefunction3D apply_event_3d(const Wavefunction3D& state,
                              const ScatterOutcome3D& event,
                              const AngleGrid3D& angles = {});

struct LocalisationResult3D {
  Wavefunction3D state;
  EventLog3D log;
};

/// Repeated sample/apply driver; caches the A field per wavelength, which
/// pays off for monochromatic sources (polychromatic runs rebuild it per
/// event and are correspondingly slow). One engine per thread.
class LocalisationEngine3D {
 public:
  LocalisationEngine3D(int samples_per_axis, double half_width,
                       const AngleGrid3D& angles = {});

  LocalisationResult3D run(int photons, const SpectralSource& source,
                           RandomStream& rng);
  LocalisationResult3D run(const Wavefunction3D& initial, int photons,
                           const SpectralSource& source, RandomStream& rng);

  /// The cached field for `wavelength` (built on first use).
  const NonscatterField3D& field(double wavelength);

 private:
  int n_;
  double half_width_;
  AngleGrid3D angles_;
  std::vector<NonscatterField3D> fields_;  // small: one per distinct lambda
};

LocalisationResult3D run_localisation_3d(const Wavefunction3D& initial,
                                         int photons,
                                         const SpectralSource& source,
                                         RandomStream& rng);

/// |c|^2 over the flattened grid.
std::vector<double> position_density_3d(const Wavefunction3D& state);

/// The three axis marginals of |c|^2, each integrating to 1.
std::array<std::vector<double>, 3> marginal_densities(
    const Wavefunction3D& state);

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// `samples` points drawn from |c|^2 by inverse CDF over the flattened
/// cells, jittered uniformly within each cell (for point-cloud plots).
std::vector<Point3> density_point_cloud(const Wavefunction3D& state,
                                        int samples, RandomStream& rng);

/// Second-moment matrix of the density about its mean (row-major 3x3).
std::array<double, 9> density_covariance(const Wavefunction3D& state);

/// Dominant eigenvector of a symmetric 3x3 matrix (power iteration).
std::array<double, 3> principal_axis(const std::array<double, 9>& matrix);

/// Density projected onto a unit axis, binned into `bins` cells over the
/// symmetric range that covers the whole cube; integrates to 1.
std::vector<double> projected_profile(const Wavefunction3D& state,
                                      const std::array<double, 3>& axis,
                                      int bins);

}  // namespace relloc
