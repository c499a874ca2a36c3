// 1D collapse dynamics against closed-form and quadrature oracles.
//
// The central check: the nonscattering amplitude quadrature must agree
// with the Bessel identity A^2(x) = (1 - J0(4 pi x / lambda)) / 2, which
// follows from (1/2pi) Int_0^2pi cos(z sin t) dt = J0(z). std::cyl_bessel_j
// provides the independent route.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "relloc/analysis.hpp"
#include "relloc/errors.hpp"
#include "relloc/wave1d.hpp"
#include "test_support.hpp"

using namespace relloc;

namespace {
constexpr double kPi = 3.14159265358979323846;

double bessel_a2(double x, double wavelength) {
  return 0.5 * (1.0 - std::cyl_bessel_j(0.0, 4.0 * kPi * std::abs(x) / wavelength));
}

Wavefunction1D centre_spike_state(int n, double d) {
  Wavefunction1D s;
  s.half_width = d;
  s.amplitudes.assign(n, 0.0);
  s.amplitudes[(n - 1) / 2] = 1.0;  // odd n: the x == 0 cell
  s.renormalize();
  return s;
}
}  // namespace

TEST_CASE("flat_state: amplitudes and normalisation") {
  const Wavefunction1D s = flat_state(1.0, 4);
  for (const double a : s.amplitudes)
    CHECK(a == doctest::Approx(0.7071067811865476).epsilon(1e-12));
  const Wavefunction1D t = flat_state(0.5, 2);
  for (const double a : t.amplitudes)
    CHECK(a == doctest::Approx(1.0).epsilon(1e-12));

  const auto density = position_density(flat_state(1.0, 2048));
  CHECK(test_support::integrate(density, 2.0 / 2048) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("flat_state: dimension validation") {
  CHECK_THROWS_AS(flat_state(1.0, 0), invalid_dimension_error);
  CHECK_THROWS_AS(flat_state(1.0, 1), invalid_dimension_error);
  CHECK_THROWS_AS(flat_state(-1.0, 16), invalid_dimension_error);
  CHECK_THROWS_AS(flat_state(0.0, 16), invalid_dimension_error);
}

TEST_CASE("grid coordinates are mirror-exact and keep x=0 off even grids") {
  const Wavefunction1D s = flat_state(1.0, 64);
  for (int j = 0; j < 64; ++j) CHECK(s.x(j) == -s.x(63 - j));
  for (int j = 0; j < 64; ++j) CHECK(s.x(j) != 0.0);
  const Wavefunction1D odd = flat_state(1.0, 5);
  CHECK(odd.x(2) == 0.0);
}

TEST_CASE("nonscatter_amplitude: Bessel oracle") {
  CHECK(nonscatter_amplitude(0.0, 1.0) == 0.0);

  // frozen spec constants, and the oracle they came from
  const double a_half = nonscatter_amplitude(0.5, 1.0);
  CHECK(a_half * a_half == doctest::Approx(0.38983).epsilon(2e-4));
  CHECK(a_half == doctest::Approx(0.62437).epsilon(2e-4));
  CHECK(a_half * a_half ==
        doctest::Approx(bessel_a2(0.5, 1.0)).epsilon(1e-10));
  const double a_quarter = nonscatter_amplitude(0.25, 1.0);
  CHECK(a_quarter * a_quarter ==
        doctest::Approx(bessel_a2(0.25, 1.0)).epsilon(1e-10));
  CHECK(a_quarter * a_quarter == doctest::Approx(0.65212).epsilon(2e-4));

  // dense sweep of the identity
  for (int i = 0; i <= 400; ++i) {
    const double x = -1.0 + i * 0.005;
    const double a = nonscatter_amplitude(x, 1.0);
    CHECK(std::abs(a * a - bessel_a2(x, 1.0)) < 1e-10);
  }
  // wavelength enters only through x / lambda
  CHECK(nonscatter_amplitude(0.7, 2.0) ==
        doctest::Approx(nonscatter_amplitude(0.35, 1.0)).epsilon(1e-13));
  CHECK_THROWS_AS(nonscatter_amplitude(0.5, 0.0), invalid_parameter_error);
}

TEST_CASE("scatter_density: closed forms on the flat state") {
  const Wavefunction1D s = flat_state(1.0, 2048);
  CHECK(scatter_density(s, 0.0, 1.0) ==
        doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-12));
  // theta = pi/2: (1/2pi) Int_{-1}^{1} (1/2) cos^2(2 pi x) dx = 1/(4 pi)
  CHECK(scatter_density(s, kPi / 2.0, 1.0) ==
        doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-10));
  // sin(pi) == 0 up to rounding: same as the theta = 0 direction
  CHECK(scatter_density(s, kPi, 1.0) ==
        doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-12));
}

TEST_CASE("nonscatter_probability: limits and completeness") {
  CHECK(nonscatter_probability(centre_spike_state(129, 1.0), 1.0) == 0.0);

  // wavelength much longer than the region: scattering phases vanish
  const Wavefunction1D s = flat_state(1.0, 1024);
  CHECK(nonscatter_probability(s, 1000.0) < 1e-4);

  // P_NS + Int P_S dtheta = 1, both sides by independent quadrature
  RandomStream rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Wavefunction1D state = test_support::random_state(1024, 1.0, rng);
    const double p_ns = nonscatter_probability(state, 1.0);
    const int bins = 8192;
    double integral = 0.0;
    for (int b = 0; b < bins; ++b)
      integral += scatter_density(state, (b + 0.5) * 2.0 * kPi / bins, 1.0);
    integral *= 2.0 * kPi / bins;
    CHECK(std::abs(p_ns + integral - 1.0) < 1e-6);
    // the Bessel route for P_NS as a second opinion
    double bessel_route = 0.0;
    for (int j = 0; j < state.size(); ++j)
      bessel_route += state.amplitudes[j] * state.amplitudes[j] *
                      bessel_a2(state.x(j), 1.0) * state.dx();
    CHECK(p_ns == doctest::Approx(bessel_route).epsilon(1e-8));
  }
}

TEST_CASE("sample_event: concentrated state always scatters") {
  const Wavefunction1D spike = centre_spike_state(65, 1.0);
  RandomStream rng(3);
  for (int i = 0; i < 50; ++i)
    CHECK(sample_event(spike, 1.0, rng).kind == EventKind::Scattered);
}

TEST_CASE("sample_event: deterministic for a fixed seed") {
  const Wavefunction1D s = flat_state(1.0, 512);
  const ScatterOutcome1D a = [&] {
    RandomStream rng(42);
    return sample_event(s, 1.0, rng);
  }();
  const ScatterOutcome1D b = [&] {
    RandomStream rng(42);
    return sample_event(s, 1.0, rng);
  }();
  CHECK(a.kind == b.kind);
  CHECK(a.theta == b.theta);
  CHECK(a.wavelength == b.wavelength);
}

TEST_CASE("sample_event: Monte Carlo frequencies match the quadrature") {
  const Wavefunction1D s = flat_state(1.0, 2048);
  const EventSampler1D sampler(s, 1.0);
  const double p_ns = nonscatter_probability(s, 1.0);

  const int draws = 100000;
  RandomStream rng(17);
  int nonscattered = 0;
  const int hist_bins = 32;
  std::vector<int> hist(hist_bins, 0);
  for (int i = 0; i < draws; ++i) {
    const ScatterOutcome1D e = sampler.draw(rng);
    if (e.kind == EventKind::NonScattered) {
      ++nonscattered;
    } else {
      ++hist[std::min(
          static_cast<int>(e.theta / (2.0 * kPi) * hist_bins), hist_bins - 1)];
    }
  }
  const double f = static_cast<double>(nonscattered) / draws;
  const double se = std::sqrt(p_ns * (1.0 - p_ns) / draws);
  CHECK(std::abs(f - p_ns) < 3.0 * se);

  // chi-square of the scattered angles against the quadrature density
  const int scattered = draws - nonscattered;
  const int sub = 256;
  double chi2 = 0.0;
  for (int b = 0; b < hist_bins; ++b) {
    double prob = 0.0;
    for (int t = 0; t < sub; ++t) {
      const double theta = (b + (t + 0.5) / sub) * 2.0 * kPi / hist_bins;
      prob += scatter_density(s, theta, 1.0);
    }
    prob *= 2.0 * kPi / (hist_bins * sub) / (1.0 - p_ns);
    const double expected = scattered * prob;
    chi2 += (hist[b] - expected) * (hist[b] - expected) / expected;
  }
  CHECK(chi2 < test_support::chi2_critical_99(hist_bins - 1));
}

TEST_CASE("sampler bin densities agree with the exact scatter density") {
  RandomStream rng(5);
  Wavefunction1D s = flat_state(1.0, 2048);
  const SpectralSource mono = SpectralSource::monochromatic(1.0);
  s = run_localisation(s, 25, mono, rng).state;
  const EventSampler1D sampler(s, 1.0);
  const auto& bins = sampler.bin_density();
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(bins.size()); ++i) {
    const double theta = (i + 0.5) * sampler.bin_width();
    worst = std::max(worst, std::abs(bins[i] - scatter_density(s, theta, 1.0)));
  }
  CHECK(worst < 2e-7);
}

TEST_CASE("apply_event: scattering at sin(theta) = 0 leaves the state alone") {
  const Wavefunction1D s = flat_state(1.0, 256);
  const Wavefunction1D out =
      apply_event(s, {EventKind::Scattered, 0.0, 1.0});
  for (int j = 0; j < s.size(); ++j)
    CHECK(out.amplitudes[j] ==
          doctest::Approx(s.amplitudes[j]).epsilon(1e-14));
}

TEST_CASE("apply_event: cosine collapse against direct evaluation") {
  const Wavefunction1D s = flat_state(1.0, 2048);
  const Wavefunction1D out =
      apply_event(s, {EventKind::Scattered, kPi / 2.0, 1.0});
  // expected density ~ cos^2(2 pi x), zero near x = +-0.25, +-0.75
  std::vector<double> expected(s.size());
  double norm = 0.0;
  for (int j = 0; j < s.size(); ++j) {
    const double m = std::cos(2.0 * kPi * s.x(j));
    expected[j] = m * m;
    norm += expected[j] * s.dx();
  }
  const auto density = position_density(out);
  const double peak = 1.0 / norm;  // renormalised cos^2 peak value
  for (int j = 0; j < s.size(); ++j)
    CHECK(density[j] == doctest::Approx(expected[j] / norm).epsilon(1e-10));
  for (const double x0 : {0.25, -0.25, 0.75, -0.75}) {
    int jn = 0;
    double best = 1e9;
    for (int j = 0; j < s.size(); ++j)
      if (std::abs(s.x(j) - x0) < best) {
        best = std::abs(s.x(j) - x0);
        jn = j;
      }
    CHECK(density[jn] < 1e-4 * peak);
  }
}

TEST_CASE("apply_event: nonscattering collapse follows the Bessel profile") {
  const Wavefunction1D s = flat_state(1.0, 1024);
  const Wavefunction1D out = apply_event(s, {EventKind::NonScattered, 0.0, 1.0});
  std::vector<double> expected(s.size());
  double norm = 0.0;
  for (int j = 0; j < s.size(); ++j) {
    expected[j] = bessel_a2(s.x(j), 1.0);
    norm += expected[j] * s.dx();
  }
  const auto density = position_density(out);
  for (int j = 0; j < s.size(); ++j)
    CHECK(std::abs(density[j] - expected[j] / norm) < 1e-8);
}

TEST_CASE("apply_event: annihilating the state is an error") {
  const Wavefunction1D spike = centre_spike_state(65, 1.0);
  CHECK_THROWS_AS(apply_event(spike, {EventKind::NonScattered, 0.0, 1.0}),
                  degenerate_collapse_error);
}

TEST_CASE("run_localisation: zero photons is the identity") {
  const Wavefunction1D s = flat_state(1.0, 512);
  RandomStream rng(9);
  const auto result =
      run_localisation(s, 0, SpectralSource::monochromatic(1.0), rng);
  CHECK(result.log.photon_count() == 0);
  CHECK(result.state.amplitudes == s.amplitudes);
}

TEST_CASE("run_localisation: 150 photons induce two mirror peaks") {
  RandomStream rng(7);
  const auto result = run_localisation(
      flat_state(1.0, 2048), 150, SpectralSource::monochromatic(1.0), rng);
  CHECK(result.log.photon_count() == 150);
  const auto density = position_density(result.state);
  CHECK(test_support::integrate(density, result.state.dx()) ==
        doctest::Approx(1.0).epsilon(1e-9));

  const auto peaks = find_density_peaks(density, 1.0, 0.1);
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks[0].x + peaks[1].x) <= 2.0 * result.state.dx());

  // parity is preserved exactly: even in, even out
  for (int j = 0; j < result.state.size(); ++j)
    CHECK(density[j] == density[result.state.size() - 1 - j]);
}

TEST_CASE("run_localisation: bit-identical for identical seeds") {
  const SpectralSource mono = SpectralSource::monochromatic(1.0);
  RandomStream r1(123), r2(123);
  const auto a = run_localisation(flat_state(1.0, 1024), 80, mono, r1);
  const auto b = run_localisation(flat_state(1.0, 1024), 80, mono, r2);
  CHECK(a.state.amplitudes == b.state.amplitudes);
  REQUIRE(a.log.events.size() == b.log.events.size());
  for (std::size_t i = 0; i < a.log.events.size(); ++i) {
    CHECK(a.log.events[i].kind == b.log.events[i].kind);
    CHECK(a.log.events[i].theta == b.log.events[i].theta);
  }
  CHECK(a.log.seed == 123);
}

TEST_CASE("run_localisation: engine run replays exactly through apply_event") {
  const SpectralSource mono = SpectralSource::monochromatic(1.0);
  RandomStream rng(31);
  const auto result = run_localisation(flat_state(1.0, 512), 40, mono, rng);
  Wavefunction1D replay = flat_state(1.0, 512);
  for (const auto& e : result.log.events) replay = apply_event(replay, e);
  CHECK(replay.amplitudes == result.state.amplitudes);
}

TEST_CASE("run_localisation: negative photon count is rejected") {
  RandomStream rng(1);
  CHECK_THROWS_AS(run_localisation(flat_state(1.0, 64), -1,
                                   SpectralSource::monochromatic(1.0), rng),
                  invalid_parameter_error);
}

TEST_CASE("normalization invariant holds through random event chains") {
  RandomStream rng(77);
  const SpectralSource mono = SpectralSource::monochromatic(1.0);
  LocalisationEngine1D engine(1024, 1.0);
  Wavefunction1D state = flat_state(1.0, 1024);
  for (int i = 0; i < 5; ++i) {
    const auto result = engine.run(state, 10, mono, rng);
    state = result.state;
    const auto density = position_density(state);
    CHECK(std::abs(test_support::integrate(density, state.dx()) - 1.0) < 1e-9);
  }
}

TEST_CASE("momentum_density: two narrow peaks give 1/(2 x0) fringes") {
  Wavefunction1D s;
  s.half_width = 1.0;
  s.amplitudes.assign(2048, 0.0);
  // nearest cells to +-0.5
  int right = 0;
  double best = 1e9;
  for (int j = 0; j < 2048; ++j) {
    if (std::abs(s.x(j) - 0.5) < best) {
      best = std::abs(s.x(j) - 0.5);
      right = j;
    }
  }
  const double x0 = s.x(right);
  s.amplitudes[right] = 1.0;
  s.amplitudes[2047 - right] = 1.0;
  s.renormalize();

  const auto q = momentum_density(s, uniform_momentum_grid(8.0, 1025));
  const double period = fringe_period(q, 0.5);
  CHECK(period == doctest::Approx(1.0 / (2.0 * x0)).epsilon(0.02));
  CHECK(fringe_contrast(q, period) > 0.9);
}

TEST_CASE("momentum_density: flat box transform has zeros at half-integers") {
  const auto q =
      momentum_density(flat_state(1.0, 2048), uniform_momentum_grid(8.0, 1025));
  const double qmax = *std::max_element(q.q.begin(), q.q.end());
  for (int k = 0; k < static_cast<int>(q.p.size()); ++k) {
    const double p = q.p[k];
    const double nearest_half = std::round(2.0 * p) / 2.0;
    if (p != 0.0 && std::abs(p - nearest_half) < 1e-12 &&
        std::abs(nearest_half) > 1e-12)
      CHECK(q.q[k] < 1e-9 * qmax);
  }
  CHECK(test_support::integrate(q.q, q.dp()) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("momentum_density: symmetric about p = 0 and validated grids") {
  RandomStream rng(13);
  const Wavefunction1D s = test_support::random_state(512, 1.0, rng);
  const auto q = momentum_density(s, uniform_momentum_grid(6.0, 257));
  for (std::size_t k = 0; k < q.q.size(); ++k)
    CHECK(q.q[k] == q.q[q.q.size() - 1 - k]);

  CHECK_THROWS_AS(momentum_density(s, {0.0, 0.5, 1.5}), invalid_grid_error);
  CHECK_THROWS_AS(momentum_density(s, {-0.5, 0.0, 0.5, 1.0}),
                  invalid_grid_error);
  CHECK_THROWS_AS(momentum_density(s, {1.0}), invalid_grid_error);
}

TEST_CASE("peak_variance: symmetry, spikes and empty halves") {
  const int n = 512;
  Wavefunction1D s;
  s.half_width = 1.0;
  s.amplitudes.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    const double t1 = (s.x(j) - 0.6) / 0.05;
    const double t2 = (s.x(j) + 0.6) / 0.05;
    s.amplitudes[j] = std::exp(-0.5 * t1 * t1) + std::exp(-0.5 * t2 * t2);
  }
  s.renormalize();
  const auto density = position_density(s);
  const double left = peak_variance(density, 1.0, Side::Left);
  const double right = peak_variance(density, 1.0, Side::Right);
  CHECK(left == doctest::Approx(right).epsilon(1e-12));

  std::vector<double> spike(n, 0.0);
  spike[n - 10] = 1.0;
  CHECK(peak_variance(spike, 1.0, Side::Right) == 0.0);
  CHECK_THROWS_AS(peak_variance(spike, 1.0, Side::Left), empty_half_error);
}

TEST_CASE("event log bookkeeping") {
  RandomStream rng(2);
  const auto result = run_localisation(
      flat_state(1.0, 256), 12, SpectralSource::monochromatic(1.0), rng);
  CHECK(result.log.photon_count() == result.log.events.size());
  CHECK(result.log.photon_count() == 12);
  for (const auto& e : result.log.events) {
    CHECK(e.wavelength > 0.0);
    if (e.kind == EventKind::Scattered) {
      CHECK(e.theta >= 0.0);
      CHECK(e.theta < 2.0 * kPi);
    }
  }
}
