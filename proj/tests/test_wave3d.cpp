// 3D scattering kernel, nonscattering field, sampler and collapse.
//
// The momentum-kick geometry: a photon arriving along +z and leaving at
// (theta, phi) transfers (sin t cos p, sin t sin p, cos t - 1) (h/lambda),
// so the collapse phase is Gamma = x sin t cos p + y sin t sin p +
// z (cos t - 1) and a scattering event at (pi/2, 0) imprints
// cos^2(2 pi (x - z)) on the density.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "relloc/analysis.hpp"
#include "relloc/errors.hpp"
#include "relloc/wave3d.hpp"
#include "test_support.hpp"

using namespace relloc;

namespace {
constexpr double kPi = 3.14159265358979323846;
const AngleGrid3D kTestAngles{64, 128};  // trimmed grid keeps tests quick

Wavefunction3D centre_spike_3d(int n, double d) {
  Wavefunction3D s;
  s.n = n;
  s.half_width = d;
  s.amplitudes.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  s.amplitudes[s.index((n - 1) / 2, (n - 1) / 2, (n - 1) / 2)] = 1.0;
  s.renormalize();
  return s;
}
}  // namespace

TEST_CASE("gamma_kernel: identities") {
  CHECK(gamma_kernel(0.3, -0.7, 0.9, 0.0, 1.234) == 0.0);
  CHECK(gamma_kernel(1.0, 0.0, 0.0, kPi / 2.0, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  // linear in the coordinates: inversion flips the sign exactly
  CHECK(gamma_kernel(-0.2, -0.4, 0.6, 1.1, 2.2) ==
        -gamma_kernel(0.2, 0.4, -0.6, 1.1, 2.2));
  // backscattering along z: Gamma = -2 z
  CHECK(gamma_kernel(0.5, 0.5, 1.0, kPi, 0.3) ==
        doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("nonscatter_amplitude_3d: origin, symmetry, Monte Carlo oracle") {
  CHECK(nonscatter_amplitude_3d(0.0, 0.0, 0.0, 1.0, kTestAngles) == 0.0);
  CHECK(nonscatter_amplitude_3d(-0.5, -0.25, -0.125, 1.0, kTestAngles) ==
        nonscatter_amplitude_3d(0.5, 0.25, 0.125, 1.0, kTestAngles));

  // solid-angle Monte Carlo estimate of A^2 at (0.5, 0, 0)
  const double a = nonscatter_amplitude_3d(0.5, 0.0, 0.0, 1.0);
  RandomStream rng(64);
  const int samples = 1000000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double ct = 2.0 * rng.uniform() - 1.0;
    const double st = std::sqrt(std::max(1.0 - ct * ct, 0.0));
    const double phi = 2.0 * kPi * rng.uniform();
    const double gamma = 0.5 * st * std::cos(phi);
    const double s = std::sin(2.0 * kPi * gamma);
    acc += s * s;
    acc2 += s * s * s * s;
  }
  const double mc = acc / samples;
  const double se = std::sqrt((acc2 / samples - mc * mc) / samples);
  CHECK(std::abs(a * a - mc) < 3.0 * se);
}

TEST_CASE("scatter_density_3d: forward direction and flat-state symmetry") {
  const Wavefunction3D flat = flat_state_3d(1.0, 16);
  CHECK(scatter_density_3d(flat, 0.0, 0.0, 1.0) ==
        doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-12));
  // flat |c|^2 is even in (x, y); antipodal azimuths see the same density
  for (const double theta : {0.4, 1.2, 2.5}) {
    for (const double phi : {0.3, 1.9}) {
      CHECK(scatter_density_3d(flat, theta, phi, 1.0) ==
            doctest::Approx(scatter_density_3d(flat, theta, phi + kPi, 1.0))
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("solid-angle completeness on random-ish states") {
  RandomStream rng(1001);
  Wavefunction3D state = flat_state_3d(1.0, 24);
  const SpectralSource mono = SpectralSource::monochromatic(1.0);
  LocalisationEngine3D engine(24, 1.0, kTestAngles);
  state = engine.run(state, 6, mono, rng).state;  // roughen the density

  const NonscatterField3D field(24, 1.0, 1.0, kTestAngles);
  const EventSampler3D sampler(state, 1.0, field, kTestAngles);
  const double dtheta = kPi / kTestAngles.n_theta;
  const double dphi = 2.0 * kPi / kTestAngles.n_phi;
  double integral = 0.0;
  for (int i = 0; i < kTestAngles.n_theta; ++i) {
    const double w = std::sin((i + 0.5) * dtheta) * dtheta * dphi;
    for (int k = 0; k < kTestAngles.n_phi; ++k)
      integral += sampler.bin_density()[i * kTestAngles.n_phi + k] * w;
  }
  const double p_ns = field.nonscatter_probability(state);
  CHECK(std::abs(integral + p_ns - 1.0) < 1e-4);
}

TEST_CASE("sampler bins match the exact density point by point") {
  RandomStream rng(55);
  const AngleGrid3D angles{32, 64};
  Wavefunction3D state = flat_state_3d(1.0, 12);
  LocalisationEngine3D engine(12, 1.0, angles);
  state =
      engine.run(state, 4, SpectralSource::monochromatic(1.0), rng).state;

  const NonscatterField3D field(12, 1.0, 1.0, angles);
  const EventSampler3D sampler(state, 1.0, field, angles);
  const double dtheta = kPi / angles.n_theta;
  const double dphi = 2.0 * kPi / angles.n_phi;
  double worst = 0.0;
  for (int i = 0; i < angles.n_theta; ++i)
    for (int k = 0; k < angles.n_phi; ++k) {
      const double exact = scatter_density_3d(
          state, (i + 0.5) * dtheta, (k + 0.5) * dphi, 1.0);
      worst = std::max(
          worst,
          std::abs(sampler.bin_density()[i * angles.n_phi + k] - exact));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("nonscatter field matches the per-point quadrature") {
  const NonscatterField3D field(8, 1.0, 1.0, kTestAngles);
  Wavefunction3D probe;
  probe.n = 8;
  probe.half_width = 1.0;
  for (const auto [ix, iy, iz] :
       {std::array<int, 3>{0, 3, 7}, {4, 4, 4}, {1, 6, 2}, {7, 0, 5}}) {
    const double direct =
        nonscatter_amplitude_3d(probe.coord(ix), probe.coord(iy),
                                probe.coord(iz), 1.0, kTestAngles);
    const double cached =
        field.a()[(static_cast<std::size_t>(ix) * 8 + iy) * 8 + iz];
    CHECK(cached == doctest::Approx(direct).epsilon(1e-11));
  }
}

TEST_CASE("sample_event_3d: concentrated state always scatters") {
  const Wavefunction3D spike = centre_spike_3d(9, 1.0);
  RandomStream rng(6);
  for (int i = 0; i < 10; ++i) {
    const ScatterOutcome3D e = sample_event_3d(spike, 1.0, rng, kTestAngles);
    CHECK(e.kind == EventKind::Scattered);
    CHECK(e.theta >= 0.0);
    CHECK(e.theta <= kPi);
    CHECK(e.phi >= 0.0);
    CHECK(e.phi < 2.0 * kPi);
  }
}

TEST_CASE("sample_event_3d: reproducible for a fixed seed") {
  const Wavefunction3D flat = flat_state_3d(1.0, 12);
  const AngleGrid3D angles{32, 64};
  const NonscatterField3D field(12, 1.0, 1.0, angles);
  const EventSampler3D sampler(flat, 1.0, field, angles);
  RandomStream r1(77), r2(77);
  const auto a = sampler.draw(r1);
  const auto b = sampler.draw(r2);
  CHECK(a.kind == b.kind);
  CHECK(a.theta == b.theta);
  CHECK(a.phi == b.phi);
}

TEST_CASE("sample_event_3d: chi-square against the quadrature density") {
  const AngleGrid3D angles{64, 128};
  const int n = 16;
  RandomStream prep(3030);
  LocalisationEngine3D engine(n, 1.0, angles);
  const Wavefunction3D state =
      engine.run(3, SpectralSource::monochromatic(1.0), prep).state;

  const NonscatterField3D field(n, 1.0, 1.0, angles);
  const EventSampler3D sampler(state, 1.0, field, angles);
  const int ht = 16, hp = 32;
  std::vector<double> expected(ht * hp, 0.0);
  const double dtheta = kPi / angles.n_theta;
  const double dphi = 2.0 * kPi / angles.n_phi;
  double total = 0.0;
  for (int i = 0; i < angles.n_theta; ++i) {
    const double w = std::sin((i + 0.5) * dtheta) * dtheta * dphi;
    for (int k = 0; k < angles.n_phi; ++k) {
      const double mass =
          scatter_density_3d(state, (i + 0.5) * dtheta, (k + 0.5) * dphi,
                             1.0) *
          w;
      expected[(i * ht / angles.n_theta) * hp + (k * hp / angles.n_phi)] +=
          mass;
      total += mass;
    }
  }

  RandomStream rng(999);
  const int draws = 100000;
  std::vector<int> counts(ht * hp, 0);
  int scattered = 0;
  for (int d = 0; d < draws; ++d) {
    const ScatterOutcome3D e = sampler.draw(rng);
    if (e.kind != EventKind::Scattered) continue;
    ++scattered;
    const int bi = std::min(static_cast<int>(e.theta / kPi * ht), ht - 1);
    const int bk =
        std::min(static_cast<int>(e.phi / (2.0 * kPi) * hp), hp - 1);
    ++counts[bi * hp + bk];
  }
  double chi2 = 0.0;
  for (int b = 0; b < ht * hp; ++b) {
    const double e = scattered * expected[b] / total;
    REQUIRE(e > 5.0);
    chi2 += (counts[b] - e) * (counts[b] - e) / e;
  }
  CHECK(chi2 < test_support::chi2_critical_99(ht * hp - 1));
}

TEST_CASE("apply_event_3d: forward scattering leaves the state alone") {
  const Wavefunction3D flat = flat_state_3d(1.0, 8);
  const Wavefunction3D out =
      apply_event_3d(flat, {EventKind::Scattered, 0.0, 0.0, 1.0}, kTestAngles);
  for (std::size_t j = 0; j < flat.amplitudes.size(); ++j)
    CHECK(out.amplitudes[j] ==
          doctest::Approx(flat.amplitudes[j]).epsilon(1e-14));
}

TEST_CASE("apply_event_3d: collapse multiplier is cos^2(2 pi (x - z))") {
  const int n = 16;
  const Wavefunction3D flat = flat_state_3d(1.0, n);
  const Wavefunction3D out = apply_event_3d(
      flat, {EventKind::Scattered, kPi / 2.0, 0.0, 1.0}, kTestAngles);
  double norm = 0.0;
  const double dv = std::pow(flat.dx(), 3);
  std::vector<double> expected(flat.amplitudes.size());
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double m =
            std::cos(2.0 * kPi * (flat.coord(ix) - flat.coord(iz)));
        expected[flat.index(ix, iy, iz)] = m * m / (8.0);  // flat rho = 1/8
        norm += expected[flat.index(ix, iy, iz)] * dv;
      }
  for (std::size_t j = 0; j < expected.size(); ++j) {
    const double c = out.amplitudes[j];
    CHECK(c * c == doctest::Approx(expected[j] / norm).epsilon(1e-10));
  }
  // independent of y: compare two y-slices
  for (int ix = 0; ix < n; ++ix)
    for (int iz = 0; iz < n; ++iz)
      CHECK(out.amplitudes[out.index(ix, 2, iz)] ==
            out.amplitudes[out.index(ix, 9, iz)]);
}

TEST_CASE("apply_event_3d: inversion symmetry survives exactly") {
  const int n = 12;
  RandomStream rng(808);
  LocalisationEngine3D engine(n, 1.0, kTestAngles);
  const auto result =
      engine.run(10, SpectralSource::monochromatic(1.0), rng);
  const auto& amp = result.state.amplitudes;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        CHECK(amp[result.state.index(ix, iy, iz)] ==
              amp[result.state.index(n - 1 - ix, n - 1 - iy, n - 1 - iz)]);
}

TEST_CASE("run_localisation_3d: zero photons, determinism, normalisation") {
  const SpectralSource mono = SpectralSource::monochromatic(1.0);
  RandomStream r0(5);
  const Wavefunction3D flat = flat_state_3d(1.0, 10);
  const auto id = run_localisation_3d(flat, 0, mono, r0);
  CHECK(id.state.amplitudes == flat.amplitudes);
  CHECK(id.log.photon_count() == 0);

  LocalisationEngine3D engine(10, 1.0, kTestAngles);
  RandomStream r1(31), r2(31);
  const auto a = engine.run(15, mono, r1);
  const auto b = engine.run(15, mono, r2);
  CHECK(a.state.amplitudes == b.state.amplitudes);
  CHECK(a.log.events.size() == b.log.events.size());
  CHECK(std::abs(a.state.norm() - 1.0) < 1e-8);
}

TEST_CASE("localisation narrows every axis marginal, including z") {
  const int n = 32;
  RandomStream rng(2024);
  LocalisationEngine3D engine(n, 1.0, kTestAngles);
  const auto result =
      engine.run(60, SpectralSource::monochromatic(1.0), rng);
  const auto marginals = marginal_densities(result.state);
  const double dx = result.state.dx();
  const double flat_axis_var = 1.0 / 3.0;  // uniform on [-1, 1]
  for (int axis = 0; axis < 3; ++axis) {
    CHECK(test_support::integrate(marginals[axis], dx) ==
          doctest::Approx(1.0).epsilon(1e-8));
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < n; ++i)
      mean += marginals[axis][i] * result.state.coord(i) * dx;
    for (int i = 0; i < n; ++i) {
      const double dev = result.state.coord(i) - mean;
      var += marginals[axis][i] * dev * dev * dx;
    }
    CHECK(var < 0.6 * flat_axis_var);
  }
}

TEST_CASE("density_point_cloud: size, support and self-consistency") {
  RandomStream rng(99);
  const Wavefunction3D flat = flat_state_3d(1.0, 8);
  CHECK(density_point_cloud(flat, 0, rng).empty());
  CHECK_THROWS_AS(density_point_cloud(flat, -1, rng), invalid_parameter_error);

  LocalisationEngine3D engine(16, 1.0, kTestAngles);
  RandomStream prep(314);
  const auto state =
      engine.run(20, SpectralSource::monochromatic(1.0), prep).state;
  const int samples = 200000;
  const auto cloud = density_point_cloud(state, samples, rng);
  REQUIRE(cloud.size() == static_cast<std::size_t>(samples));

  // chi-square of the points binned onto a 4^3 coarsening of the grid
  const int coarse = 4, factor = 16 / coarse;
  std::vector<double> mass(coarse * coarse * coarse, 0.0);
  const double dv = std::pow(state.dx(), 3);
  for (int ix = 0; ix < 16; ++ix)
    for (int iy = 0; iy < 16; ++iy)
      for (int iz = 0; iz < 16; ++iz) {
        const double c = state.amplitudes[state.index(ix, iy, iz)];
        mass[(ix / factor * coarse + iy / factor) * coarse + iz / factor] +=
            c * c * dv;
      }
  std::vector<int> counts(mass.size(), 0);
  for (const auto& p : cloud) {
    const auto bin = [&](double v) {
      return std::clamp(static_cast<int>((v + 1.0) / 2.0 * coarse), 0,
                        coarse - 1);
    };
    ++counts[(bin(p.x) * coarse + bin(p.y)) * coarse + bin(p.z)];
  }
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t b = 0; b < mass.size(); ++b) {
    const double e = samples * mass[b];
    if (e < 5.0) continue;  // empty corners after localisation
    chi2 += (counts[b] - e) * (counts[b] - e) / e;
    ++dof;
  }
  CHECK(chi2 < test_support::chi2_critical_99(dof - 1));
}

TEST_CASE("flat-state marginals are exactly flat") {
  const auto marginals = marginal_densities(flat_state_3d(1.0, 8));
  for (const auto& m : marginals)
    for (const double v : m) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("principal axis and projected bimodality on a synthetic state") {
  const int n = 24;
  Wavefunction3D s;
  s.n = n;
  s.half_width = 1.0;
  s.amplitudes.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double x = s.coord(ix), y = s.coord(iy), z = s.coord(iz);
        for (const double sign : {-1.0, 1.0}) {
          const double cx = sign * 0.5 * inv_sqrt2;
          const double r2 = (x - cx) * (x - cx) + (y - cx) * (y - cx) + z * z;
          s.amplitudes[s.index(ix, iy, iz)] += std::exp(-r2 / (2.0 * 0.02));
        }
      }
  s.renormalize();
  const auto axis = principal_axis(density_covariance(s));
  CHECK(std::abs(axis[0] * inv_sqrt2 + axis[1] * inv_sqrt2) > 0.99);
  CHECK(std::abs(axis[2]) < 0.1);

  const auto profile = projected_profile(s, axis, 48);
  const auto peaks =
      find_peaks(profile, 0.0, 1.0, 0.1);  // bin index coordinates
  CHECK(peaks.size() == 2);
}

TEST_CASE("3D grid validation") {
  CHECK_THROWS_AS(flat_state_3d(1.0, 1), invalid_dimension_error);
  CHECK_THROWS_AS(flat_state_3d(0.0, 8), invalid_dimension_error);
  RandomStream rng(1);
  CHECK_THROWS_AS(run_localisation_3d(flat_state_3d(1.0, 8), -2,
                                      SpectralSource::monochromatic(1.0), rng),
                  invalid_parameter_error);
}
