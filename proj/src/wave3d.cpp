#include "relloc/wave3d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relloc/errors.hpp"
#include "relloc/sampling.hpp"

namespace relloc {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kNormFloor = 1e-300;

double symmetric_coord3(int j, int n, double step) {
  const int mirror = n - 1 - j;
  if (j == mirror) return 0.0;
  const bool upper = j > mirror;
  const int k = upper ? j : mirror;
  const double v =
      (n % 2 == 0) ? (k - n / 2 + 0.5) * step : (k - (n - 1) / 2) * step;
  return upper ? v : -v;
}

// cos/sin of (g * coord(j)) along a symmetric axis. The upper half comes
// from a rotation recurrence; the lower half is the exact conjugate, so
// products of these phases are bitwise even/odd under inversion.
void axis_phases(int n, double step, double g, double* c, double* s) {
  const bool even = (n % 2 == 0);
  const int pairs = even ? n / 2 : (n - 1) / 2;
  const double x0 = even ? 0.5 * step : step;
  const int up0 = even ? n / 2 : (n + 1) / 2;
  double cr = std::cos(g * x0), sr = std::sin(g * x0);
  const double ca = std::cos(g * step), sa = std::sin(g * step);
  for (int r = 0; r < pairs; ++r) {
    c[up0 + r] = cr;
    s[up0 + r] = sr;
    c[up0 - 1 - r - (even ? 0 : 1)] = cr;
    s[up0 - 1 - r - (even ? 0 : 1)] = -sr;
    const double cn = cr * ca - sr * sa;
    sr = sr * ca + cr * sa;
    cr = cn;
  }
  if (!even) {
    c[(n - 1) / 2] = 1.0;
    s[(n - 1) / 2] = 0.0;
  }
}

struct AngleTables {
  int nt, np;
  double dtheta, dphi;
  std::vector<double> sin_t, shift_t;  // sin(theta_i), cos(theta_i) - 1
  std::vector<double> weight;          // sin(theta_i) dtheta dphi
  std::vector<double> cos_p, sin_p;

  explicit AngleTables(const AngleGrid3D& g) : nt(g.n_theta), np(g.n_phi) {
    if (nt < 2 || np < 2 || np % 2 != 0)
      throw invalid_parameter_error(
          "angle grid: need n_theta >= 2 and even n_phi >= 2");
    dtheta = kPi / nt;
    dphi = kTwoPi / np;
    sin_t.resize(nt);
    shift_t.resize(nt);
    weight.resize(nt);
    for (int i = 0; i < nt; ++i) {
      const double t = (i + 0.5) * dtheta;
      sin_t[i] = std::sin(t);
      shift_t[i] = std::cos(t) - 1.0;
      weight[i] = sin_t[i] * dtheta * dphi;
    }
    cos_p.resize(np);
    sin_p.resize(np);
    for (int k = 0; k < np; ++k) {
      const double p = (k + 0.5) * dphi;
      cos_p[k] = std::cos(p);
      sin_p[k] = std::sin(p);
    }
  }
  double total_weight() const {
    double acc = 0.0;
    for (int i = 0; i < nt; ++i) acc += weight[i] * np;
    return acc;
  }
};

void check_state(const Wavefunction3D& s) {
  if (s.n < 2 || !(s.half_width > 0.0) ||
      s.amplitudes.size() !=
          static_cast<std::size_t>(s.n) * s.n * s.n)
    throw invalid_dimension_error("Wavefunction3D: inconsistent grid");
}

// Collapse multiplier cos(g * Gamma(theta, phi)) evaluated for every cell
// through per-axis phases: exact, separable, and exactly even under
// inversion. `out` gets n^3 values in state layout.
void scatter_multiplier(int n, double step, double g, double theta, double phi,
                        std::vector<double>& out) {
  const double st = std::sin(theta);
  const double ax = st * std::cos(phi);
  const double ay = st * std::sin(phi);
  const double az = std::cos(theta) - 1.0;
  std::vector<double> cx(n), sx(n), cy(n), sy(n), cz(n), sz(n);
  axis_phases(n, step, g * ax, cx.data(), sx.data());
  axis_phases(n, step, g * ay, cy.data(), sy.data());
  axis_phases(n, step, g * az, cz.data(), sz.data());
  // combine y and z first, then sweep x
  std::vector<double> tre(static_cast<std::size_t>(n) * n),
      tim(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int iz = 0; iz < n; ++iz) {
      tre[iy * n + iz] = cy[iy] * cz[iz] - sy[iy] * sz[iz];
      tim[iy * n + iz] = sy[iy] * cz[iz] + cy[iy] * sz[iz];
    }
  out.resize(static_cast<std::size_t>(n) * n * n);
  for (int ix = 0; ix < n; ++ix) {
    double* dst = out.data() + static_cast<std::size_t>(ix) * n * n;
    const double cxi = cx[ix], sxi = sx[ix];
    for (int yz = 0; yz < n * n; ++yz) dst[yz] = cxi * tre[yz] - sxi * tim[yz];
  }
}

}  // namespace

double Wavefunction3D::coord(int i) const {
  return symmetric_coord3(i, n, dx());
}

double Wavefunction3D::norm() const {
  double acc = 0.0;
  for (const double a : amplitudes) acc += a * a;
  const double d = dx();
  return std::sqrt(acc * d * d * d);
}

void Wavefunction3D::renormalize() {
  const double nn = norm();
  if (!(nn >= kNormFloor))
    throw degenerate_collapse_error(
        "3D state norm underflow: collapse multiplier annihilated the state");
  const double inv = 1.0 / nn;
  for (double& a : amplitudes) a *= inv;
}

Wavefunction3D flat_state_3d(double half_width, int samples_per_axis) {
  if (samples_per_axis < 2)
    throw invalid_dimension_error("flat_state_3d: need >= 2 samples per axis");
  if (!(half_width > 0.0))
    throw invalid_dimension_error("flat_state_3d: half_width must be positive");
  Wavefunction3D s;
  s.n = samples_per_axis;
  s.half_width = half_width;
  const double c = std::pow(2.0 * half_width, -1.5);
  s.amplitudes.assign(
      static_cast<std::size_t>(s.n) * s.n * s.n, c);
  s.renormalize();
  return s;
}

double gamma_kernel(double x, double y, double z, double theta, double phi) {
  const double st = std::sin(theta);
  return x * st * std::cos(phi) + y * st * std::sin(phi) +
         z * (std::cos(theta) - 1.0);
}

double nonscatter_amplitude_3d(double x, double y, double z, double wavelength,
                               const AngleGrid3D& angles) {
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("nonscatter_amplitude_3d: wavelength <= 0");
  const AngleTables tab(angles);
  const double g = kTwoPi / wavelength;
  double acc = 0.0;
  for (int i = 0; i < tab.nt; ++i) {
    const double st = tab.sin_t[i], sh = tab.shift_t[i];
    double row = 0.0;
    for (int k = 0; k < tab.np; ++k) {
      const double gamma =
          x * st * tab.cos_p[k] + y * st * tab.sin_p[k] + z * sh;
      const double u = std::sin(g * gamma);
      row += u * u;
    }
    acc += row * tab.weight[i];
  }
  return std::sqrt(std::max(acc / (2.0 * kTwoPi), 0.0));
}

double scatter_density_3d(const Wavefunction3D& state, double theta,
                          double phi, double wavelength) {
  check_state(state);
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("scatter_density_3d: wavelength <= 0");
  const int n = state.n;
  std::vector<double> mult;
  scatter_multiplier(n, state.dx(), kTwoPi / wavelength, theta, phi, mult);
  double acc = 0.0;
  for (std::size_t j = 0; j < mult.size(); ++j) {
    const double c = state.amplitudes[j];
    acc += c * c * mult[j] * mult[j];
  }
  const double d = state.dx();
  return acc * d * d * d / (2.0 * kTwoPi);
}

NonscatterField3D::NonscatterField3D(int n, double half_width,
                                     double wavelength,
                                     const AngleGrid3D& angles)
    : n_(n), half_width_(half_width), wavelength_(wavelength) {
  if (n < 2 || !(half_width > 0.0) || !(wavelength > 0.0))
    throw invalid_parameter_error("NonscatterField3D: bad grid or wavelength");
  const AngleTables tab(angles);
  const double step = 2.0 * half_width / n;
  const double kappa = 2.0 * kTwoPi / wavelength;  // 4 pi / lambda
  const std::size_t nxy = static_cast<std::size_t>(n) * n;
  const std::size_t cells = nxy * n;

  // A^2(r) = (1/8pi) sum_{i,k} w_i (1 - cos(kappa Gamma))
  //        = (Sw - K(r)) / (8pi).
  // Over the full phi circle the (x,y) phase sum T_i is real, so K is a
  // sum of separable real rank-1 terms expanded along z.
  std::vector<double> k_field(cells, 0.0);
  std::vector<double> pxy(nxy), qxy(nxy);
  std::vector<double> ur(n), ui(n), vr(n), vi(n), cz(n), sz(n);
  for (int i = 0; i < tab.nt; ++i) {
    std::fill(pxy.begin(), pxy.end(), 0.0);
    std::fill(qxy.begin(), qxy.end(), 0.0);
    const double s = tab.sin_t[i];
    for (int k = 0; k < tab.np / 2; ++k) {
      axis_phases(n, step, kappa * s * tab.cos_p[k], ur.data(), ui.data());
      axis_phases(n, step, kappa * s * tab.sin_p[k], vr.data(), vi.data());
      for (int ix = 0; ix < n; ++ix) {
        double* prow = pxy.data() + static_cast<std::size_t>(ix) * n;
        double* qrow = qxy.data() + static_cast<std::size_t>(ix) * n;
        const double a = ur[ix], b = ui[ix];
        for (int iy = 0; iy < n; ++iy) {
          prow[iy] += a * vr[iy];
          qrow[iy] += b * vi[iy];
        }
      }
    }
    axis_phases(n, step, kappa * tab.shift_t[i], cz.data(), sz.data());
    const double wi = tab.weight[i];
    for (std::size_t xy = 0; xy < nxy; ++xy) {
      const double t = 2.0 * wi * (pxy[xy] - qxy[xy]);  // w_i * T_i(x,y)
      double* dst = k_field.data() + xy * n;
      for (int iz = 0; iz < n; ++iz) dst[iz] += t * cz[iz];
    }
  }
  const double sw = tab.total_weight();
  a2_.resize(cells);
  a_.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    a2_[j] = std::max((sw - k_field[j]) / (4.0 * kTwoPi), 0.0);
    a_[j] = std::sqrt(a2_[j]);
  }
}

double NonscatterField3D::nonscatter_probability(
    const Wavefunction3D& state) const {
  check_state(state);
  if (state.n != n_ || state.half_width != half_width_)
    throw invalid_dimension_error("NonscatterField3D: grid mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < a2_.size(); ++j) {
    const double c = state.amplitudes[j];
    acc += c * c * a2_[j];
  }
  const double d = state.dx();
  return std::clamp(acc * d * d * d, 0.0, 1.0);
}

double nonscatter_probability_3d(const Wavefunction3D& state,
                                 double wavelength,
                                 const AngleGrid3D& angles) {
  check_state(state);
  return NonscatterField3D(state.n, state.half_width, wavelength, angles)
      .nonscatter_probability(state);
}

EventSampler3D::EventSampler3D(const Wavefunction3D& state, double wavelength,
                               const NonscatterField3D& field,
                               const AngleGrid3D& angles)
    : angles_(angles), wavelength_(wavelength) {
  check_state(state);
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("EventSampler3D: wavelength <= 0");
  const AngleTables tab(angles);
  const int n = state.n;
  const int nt = tab.nt, np = tab.np;
  const double step = state.dx();
  const double dv = step * step * step;
  const double kappa = 2.0 * kTwoPi / wavelength;
  const std::size_t nxy = static_cast<std::size_t>(n) * n;

  // cell masses |c|^2 dV and their total
  std::vector<double> rho(state.amplitudes.size());
  double mass = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) {
    rho[j] = state.amplitudes[j] * state.amplitudes[j] * dv;
    mass += rho[j];
  }

  // stage 1: contract z against e^{i kappa (cos t - 1) z} for every theta
  std::vector<double> czt(static_cast<std::size_t>(nt) * n),
      szt(static_cast<std::size_t>(nt) * n);
  for (int i = 0; i < nt; ++i)
    axis_phases(n, step, kappa * tab.shift_t[i], &czt[i * n], &szt[i * n]);
  std::vector<double> br(static_cast<std::size_t>(nt) * nxy),
      bi(static_cast<std::size_t>(nt) * nxy);
  for (std::size_t xy = 0; xy < nxy; ++xy) {
    const double* row = rho.data() + xy * n;
    for (int i = 0; i < nt; ++i) {
      const double* ct = &czt[i * n];
      const double* st = &szt[i * n];
      double re = 0.0, im = 0.0;
      for (int iz = 0; iz < n; ++iz) {
        re += row[iz] * ct[iz];
        im += row[iz] * st[iz];
      }
      br[static_cast<std::size_t>(i) * nxy + xy] = re;
      bi[static_cast<std::size_t>(i) * nxy + xy] = im;
    }
  }

  // stage 2: for each theta, contract y then x for each phi pair
  // (phi and phi + pi share the four y-contractions).
  density_.assign(static_cast<std::size_t>(nt) * np, 0.0);
  std::vector<double> cx(n), sx(n), cy(n), sy(n);
  std::vector<double> rc(n), rs(n), sc(n), ss(n);
  for (int i = 0; i < nt; ++i) {
    const double* bre = br.data() + static_cast<std::size_t>(i) * nxy;
    const double* bim = bi.data() + static_cast<std::size_t>(i) * nxy;
    const double s = tab.sin_t[i];
    for (int k = 0; k < np / 2; ++k) {
      axis_phases(n, step, kappa * s * tab.cos_p[k], cx.data(), sx.data());
      axis_phases(n, step, kappa * s * tab.sin_p[k], cy.data(), sy.data());
      for (int ix = 0; ix < n; ++ix) {
        const double* rrow = bre + static_cast<std::size_t>(ix) * n;
        const double* irow = bim + static_cast<std::size_t>(ix) * n;
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        for (int iy = 0; iy < n; ++iy) {
          a0 += rrow[iy] * cy[iy];
          a1 += rrow[iy] * sy[iy];
          a2 += irow[iy] * cy[iy];
          a3 += irow[iy] * sy[iy];
        }
        rc[ix] = a0;
        rs[ix] = a1;
        sc[ix] = a2;
        ss[ix] = a3;
      }
      double d0 = 0.0, d1 = 0.0;
      for (int ix = 0; ix < n; ++ix) {
        d0 += cx[ix] * (rc[ix] - ss[ix]) - sx[ix] * (rs[ix] + sc[ix]);
        d1 += cx[ix] * (rc[ix] + ss[ix]) + sx[ix] * (sc[ix] - rs[ix]);
      }
      const double scale = 1.0 / (4.0 * kTwoPi);
      density_[static_cast<std::size_t>(i) * np + k] =
          std::max((mass + d0) * scale, 0.0);
      density_[static_cast<std::size_t>(i) * np + k + np / 2] =
          std::max((mass + d1) * scale, 0.0);
    }
  }

  // normalised branch probabilities over {nonscattered} + flattened bins
  p_ns_ = field.nonscatter_probability(state);
  cdf_.resize(density_.size() + 1);
  cdf_[0] = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < density_.size(); ++j) {
    total += density_[j] * tab.weight[j / np];
    cdf_[j + 1] = total;
  }
  if (!(total > 0.0))
    throw invalid_parameter_error("EventSampler3D: zero scattering mass");
  const double grand = p_ns_ + total;
  p_ns_ /= grand;
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

ScatterOutcome3D EventSampler3D::draw(RandomStream& rng) const {
  if (rng.uniform() < p_ns_)
    return {EventKind::NonScattered, 0.0, 0.0, wavelength_};
  const double u = std::min(rng.uniform(), 0x1.fffffffffffffp-1);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t j = static_cast<std::size_t>(it - cdf_.begin());
  j = std::min(std::max<std::size_t>(j, 1), cdf_.size() - 1) - 1;
  while (j + 1 < cdf_.size() - 1 && cdf_[j + 1] <= cdf_[j]) ++j;
  const double w = cdf_[j + 1] - cdf_[j];
  const double frac = w > 0.0 ? (u - cdf_[j]) / w : 0.5;
  const int np = angles_.n_phi;
  const int i = static_cast<int>(j) / np;
  const int k = static_cast<int>(j) % np;
  const double dtheta = kPi / angles_.n_theta;
  const double dphi = kTwoPi / np;
  const double phi = (k + frac) * dphi;
  const double theta = (i + rng.uniform()) * dtheta;
  return {EventKind::Scattered, theta, phi, wavelength_};
}

ScatterOutcome3D sample_event_3d(const Wavefunction3D& state,
                                 double wavelength, RandomStream& rng,
                                 const AngleGrid3D& angles) {
  const NonscatterField3D field(state.n, state.half_width, wavelength, angles);
  return EventSampler3D(state, wavelength, field, angles).draw(rng);
}

namespace {

void apply_in_place_3d(Wavefunction3D& state, const ScatterOutcome3D& event,
                       const NonscatterField3D& field,
                       std::vector<double>& scratch) {
  if (event.kind == EventKind::Scattered) {
    scatter_multiplier(state.n, state.dx(), kTwoPi / event.wavelength,
                       event.theta, event.phi, scratch);
    for (std::size_t j = 0; j < scratch.size(); ++j)
      state.amplitudes[j] *= scratch[j];
  } else {
    const auto& a = field.a();
    for (std::size_t j = 0; j < a.size(); ++j) state.amplitudes[j] *= a[j];
  }
  state.renormalize();
}

}  // namespace

Wavefunction3D apply_event_3d(const Wavefunction3D& state,
                              const ScatterOutcome3D& event,
                              const AngleGrid3D& angles) {
  check_state(state);
  if (!(event.wavelength > 0.0))
    throw invalid_parameter_error("apply_event_3d: wavelength <= 0");
  Wavefunction3D out = state;
  std::vector<double> scratch;
  if (event.kind == EventKind::Scattered) {
    scatter_multiplier(out.n, out.dx(), kTwoPi / event.wavelength, event.theta,
                       event.phi, scratch);
    for (std::size_t j = 0; j < scratch.size(); ++j)
      out.amplitudes[j] *= scratch[j];
    out.renormalize();
  } else {
    const NonscatterField3D field(out.n, out.half_width, event.wavelength,
                                  angles);
    const auto& a = field.a();
    for (std::size_t j = 0; j < a.size(); ++j) out.amplitudes[j] *= a[j];
    out.renormalize();
  }
  return out;
}

LocalisationEngine3D::LocalisationEngine3D(int samples_per_axis,
                                           double half_width,
                                           const AngleGrid3D& angles)
    : n_(samples_per_axis), half_width_(half_width), angles_(angles) {
  if (samples_per_axis < 2)
    throw invalid_dimension_error("LocalisationEngine3D: need >= 2 samples");
  if (!(half_width > 0.0))
    throw invalid_dimension_error("LocalisationEngine3D: half_width <= 0");
}

const NonscatterField3D& LocalisationEngine3D::field(double wavelength) {
  for (const auto& f : fields_)
    if (f.wavelength() == wavelength) return f;
  if (fields_.size() >= 8) fields_.erase(fields_.begin());
  fields_.emplace_back(n_, half_width_, wavelength, angles_);
  return fields_.back();
}

LocalisationResult3D LocalisationEngine3D::run(int photons,
                                               const SpectralSource& source,
                                               RandomStream& rng) {
  return run(flat_state_3d(half_width_, n_), photons, source, rng);
}

LocalisationResult3D LocalisationEngine3D::run(const Wavefunction3D& initial,
                                               int photons,
                                               const SpectralSource& source,
                                               RandomStream& rng) {
  check_state(initial);
  if (photons < 0)
    throw invalid_parameter_error("run_localisation_3d: photons < 0");
  if (initial.n != n_ || initial.half_width != half_width_)
    throw invalid_dimension_error(
        "run_localisation_3d: state does not match engine grid");
  LocalisationResult3D result{initial, EventLog3D{rng.seed(), {}}};
  result.log.events.reserve(static_cast<std::size_t>(photons));
  std::vector<double> scratch;
  for (int i = 0; i < photons; ++i) {
    const double lambda = source.draw(rng);
    const NonscatterField3D& f = field(lambda);
    EventSampler3D sampler(result.state, lambda, f, angles_);
    const ScatterOutcome3D outcome = sampler.draw(rng);
    apply_in_place_3d(result.state, outcome, f, scratch);
    result.log.events.push_back(outcome);
  }
  return result;
}

LocalisationResult3D run_localisation_3d(const Wavefunction3D& initial,
                                         int photons,
                                         const SpectralSource& source,
                                         RandomStream& rng) {
  LocalisationEngine3D engine(initial.n, initial.half_width);
  return engine.run(initial, photons, source, rng);
}

std::vector<double> position_density_3d(const Wavefunction3D& state) {
  std::vector<double> d(state.amplitudes.size());
  for (std::size_t j = 0; j < d.size(); ++j)
    d[j] = state.amplitudes[j] * state.amplitudes[j];
  return d;
}

std::array<std::vector<double>, 3> marginal_densities(
    const Wavefunction3D& state) {
  check_state(state);
  const int n = state.n;
  const double d = state.dx();
  const double slab = d * d;  // integrate over the two other axes
  std::array<std::vector<double>, 3> out;
  for (auto& m : out) m.assign(n, 0.0);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double c = state.amplitudes[state.index(ix, iy, iz)];
        const double rho = c * c * slab;
        out[0][ix] += rho;
        out[1][iy] += rho;
        out[2][iz] += rho;
      }
  return out;
}

std::vector<Point3> density_point_cloud(const Wavefunction3D& state,
                                        int samples, RandomStream& rng) {
  check_state(state);
  if (samples < 0)
    throw invalid_parameter_error("density_point_cloud: samples < 0");
  std::vector<Point3> pts;
  if (samples == 0) return pts;
  const CellSampler sampler(position_density_3d(state), 0.0, 1.0);
  const int n = state.n;
  const double d = state.dx();
  pts.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    const std::size_t j = sampler.draw_index(rng);
    const int ix = static_cast<int>(j) / (n * n);
    const int iy = (static_cast<int>(j) / n) % n;
    const int iz = static_cast<int>(j) % n;
    pts.push_back({state.coord(ix) + (rng.uniform() - 0.5) * d,
                   state.coord(iy) + (rng.uniform() - 0.5) * d,
                   state.coord(iz) + (rng.uniform() - 0.5) * d});
  }
  return pts;
}

std::array<double, 9> density_covariance(const Wavefunction3D& state) {
  check_state(state);
  const int n = state.n;
  const double d = state.dx();
  const double dv = d * d * d;
  double mean[3] = {0.0, 0.0, 0.0};
  double mom[9] = {0};
  double mass = 0.0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double c = state.amplitudes[state.index(ix, iy, iz)];
        const double rho = c * c * dv;
        const double r[3] = {state.coord(ix), state.coord(iy),
                             state.coord(iz)};
        mass += rho;
        for (int a = 0; a < 3; ++a) {
          mean[a] += rho * r[a];
          for (int b = 0; b < 3; ++b) mom[a * 3 + b] += rho * r[a] * r[b];
        }
      }
  std::array<double, 9> cov{};
  for (int a = 0; a < 3; ++a) {
    mean[a] /= mass;
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      cov[a * 3 + b] = mom[a * 3 + b] / mass - mean[a] * mean[b];
  return cov;
}

std::array<double, 3> principal_axis(const std::array<double, 9>& m) {
  std::array<double, 3> v{1.0, 1.0, 1.0};
  for (int iter = 0; iter < 128; ++iter) {
    std::array<double, 3> w{};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) w[a] += m[a * 3 + b] * v[b];
    const double norm = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    if (!(norm > 0.0)) break;
    for (int a = 0; a < 3; ++a) v[a] = w[a] / norm;
  }
  // fix an orientation so the result is reproducible
  if (v[0] + v[1] + v[2] < 0.0)
    for (auto& c : v) c = -c;
  return v;
}

std::vector<double> projected_profile(const Wavefunction3D& state,
                                      const std::array<double, 3>& axis,
                                      int bins) {
  check_state(state);
  if (bins < 2) throw invalid_parameter_error("projected_profile: bins < 2");
  const int n = state.n;
  const double d = state.dx();
  const double dv = d * d * d;
  const double reach = state.half_width * (std::abs(axis[0]) +
                                           std::abs(axis[1]) +
                                           std::abs(axis[2]));
  const double span = 2.0 * reach;
  const double ds = span / bins;
  std::vector<double> prof(bins, 0.0);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const double c = state.amplitudes[state.index(ix, iy, iz)];
        const double s = state.coord(ix) * axis[0] +
                         state.coord(iy) * axis[1] +
                         state.coord(iz) * axis[2];
        int b = static_cast<int>((s + reach) / ds);
        b = std::clamp(b, 0, bins - 1);
        prof[b] += c * c * dv;
      }
  for (double& p : prof) p /= ds;
  return prof;
}

}  // namespace relloc
