#include "relloc/wave1d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relloc/errors.hpp"

namespace relloc {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kNormFloor = 1e-300;

// Symmetric coordinate for n samples with spacing `step`: j and n-1-j map
// to bitwise-negated values, and an odd-n centre maps to exactly 0.
double symmetric_coord(int j, int n, double step) {
  const int mirror = n - 1 - j;
  if (j == mirror) return 0.0;
  const bool upper = j > mirror;
  const int k = upper ? j : mirror;
  const double v = (n % 2 == 0) ? (k - n / 2 + 0.5) * step
                                : (k - (n - 1) / 2) * step;
  return upper ? v : -v;
}

// Fold of a symmetric grid into |x| pairs: pair r couples cells
// lower(r) and upper(r) at +-x_abs(r); odd n has an extra centre cell.
struct Fold {
  int pairs;
  int centre;  // index of the x == 0 cell, or -1
  double x0, step;

  explicit Fold(int n, double dx) {
    if (n % 2 == 0) {
      pairs = n / 2;
      centre = -1;
      x0 = 0.5 * dx;
    } else {
      pairs = (n - 1) / 2;
      centre = (n - 1) / 2;
      x0 = dx;
    }
    step = dx;
  }
  int upper(int r, int n) const { return (n % 2 == 0 ? n / 2 : (n + 1) / 2) + r; }
  int lower(int r, int n) const { return (n % 2 == 0 ? n / 2 - 1 : (n - 1) / 2 - 1) - r; }
  double x_abs(int r) const { return x0 + r * step; }
};

void check_angle_bins(int bins) {
  if (bins < 4 || bins % 4 != 0)
    throw invalid_parameter_error("angle_bins must be a positive multiple of 4");
}

// |sin theta_i| for the first quadrant of the midpoint angle grid;
// the other three quadrants repeat these values.
std::vector<double> quarter_sines(int bins) {
  check_angle_bins(bins);
  const int q = bins / 4;
  std::vector<double> s(q);
  const double h = kTwoPi / bins;
  for (int i = 0; i < q; ++i) s[i] = std::sin((i + 0.5) * h);
  return s;
}

double a2_from_sines(double x_abs, double wavelength,
                     const std::vector<double>& sines) {
  const double z = kTwoPi * x_abs / wavelength;
  double acc = 0.0;
  for (const double s : sines) {
    const double t = std::sin(z * s);
    acc += t * t;
  }
  return acc / static_cast<double>(sines.size());
}

// Catmull-Rom on a uniform table f[i] = f(i*step), for x >= 0. The table
// must be padded so that floor(x/step)+2 stays in range; index -1 reflects
// to +1 (all tabulated functions here are even).
double cubic_even_table(const std::vector<double>& f, double step, double x) {
  double t = x / step;
  const int last = static_cast<int>(f.size()) - 3;
  int i = static_cast<int>(t);
  if (i < 0) i = 0;
  if (i > last) i = last;
  const double u = t - i;
  const double fm1 = (i >= 1) ? f[i - 1] : f[1];
  const double f0 = f[i], f1 = f[i + 1], f2 = f[i + 2];
  return 0.5 * (2.0 * f0 + u * ((f1 - fm1) +
                                u * ((2.0 * fm1 - 5.0 * f0 + 4.0 * f1 - f2) +
                                     u * (3.0 * (f0 - f1) + f2 - fm1))));
}

// Cosine transform of the folded density at q_m = m*dq, m in [0, count):
//   D(q) = sum_r mass_r cos(q x_abs_r) + centre_mass.
// Rotation recurrences (cos,sin pairs) keep the error at ~n*eps even for
// small angle steps.
std::vector<double> cosine_transform_grid(const std::vector<double>& mass,
                                          double x0, double step,
                                          double centre_mass, double dq,
                                          int count) {
  std::vector<double> d(count);
  const int n = static_cast<int>(mass.size());
  for (int m = 0; m < count; ++m) {
    const double q = m * dq;
    double c = std::cos(q * x0), s = std::sin(q * x0);
    const double ca = std::cos(q * step), sa = std::sin(q * step);
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
      acc += mass[r] * c;
      const double cn = c * ca - s * sa;
      s = s * ca + c * sa;
      c = cn;
    }
    d[m] = acc + centre_mass;
  }
  return d;
}

}  // namespace

double Wavefunction1D::x(int j) const { return symmetric_coord(j, size(), dx()); }

double Wavefunction1D::norm() const {
  double acc = 0.0;
  for (const double a : amplitudes) acc += a * a;
  return std::sqrt(acc * dx());
}

void Wavefunction1D::renormalize() {
  const double n = norm();
  if (!(n >= kNormFloor))
    throw degenerate_collapse_error(
        "state norm underflow: collapse multiplier annihilated the state");
  const double inv = 1.0 / n;
  for (double& a : amplitudes) a *= inv;
}

Wavefunction1D flat_state(double half_width, int samples) {
  if (samples < 2)
    throw invalid_dimension_error("flat_state: need at least 2 samples");
  if (!(half_width > 0.0))
    throw invalid_dimension_error("flat_state: half_width must be positive");
  Wavefunction1D s;
  s.half_width = half_width;
  s.amplitudes.assign(samples, 1.0 / std::sqrt(2.0 * half_width));
  s.renormalize();
  return s;
}

double nonscatter_amplitude(double x, double wavelength, int angle_bins) {
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("nonscatter_amplitude: wavelength <= 0");
  const auto sines = quarter_sines(angle_bins);
  return std::sqrt(std::max(a2_from_sines(std::abs(x), wavelength, sines), 0.0));
}

double scatter_density(const Wavefunction1D& state, double theta,
                       double wavelength) {
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("scatter_density: wavelength <= 0");
  const int n = state.size();
  const Fold fold(n, state.dx());
  const double k = kTwoPi * std::sin(theta) / wavelength;
  double acc = 0.0;
  for (int r = 0; r < fold.pairs; ++r) {
    const double cl = state.amplitudes[fold.lower(r, n)];
    const double cu = state.amplitudes[fold.upper(r, n)];
    const double m = std::cos(k * fold.x_abs(r));
    acc += (cl * cl + cu * cu) * m * m;
  }
  if (fold.centre >= 0) {
    const double cc = state.amplitudes[fold.centre];
    acc += cc * cc;
  }
  return acc * state.dx() / kTwoPi;
}

double nonscatter_probability(const Wavefunction1D& state, double wavelength,
                              int angle_bins) {
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("nonscatter_probability: wavelength <= 0");
  const auto sines = quarter_sines(angle_bins);
  const int n = state.size();
  const Fold fold(n, state.dx());
  double acc = 0.0;
  for (int r = 0; r < fold.pairs; ++r) {
    const double cl = state.amplitudes[fold.lower(r, n)];
    const double cu = state.amplitudes[fold.upper(r, n)];
    acc += (cl * cl + cu * cu) * a2_from_sines(fold.x_abs(r), wavelength, sines);
  }
  // centre cell contributes nothing: A(0) == 0
  return std::clamp(acc * state.dx(), 0.0, 1.0);
}

EventSampler1D::EventSampler1D(const Wavefunction1D& state, double wavelength,
                               int angle_bins)
    : EventSampler1D(state, wavelength, angle_bins,
                     nonscatter_probability(state, wavelength, angle_bins)) {}

EventSampler1D::EventSampler1D(const Wavefunction1D& state, double wavelength,
                               int angle_bins, double nonscatter_prob)
    : wavelength_(wavelength), bins_(angle_bins), p_ns_(nonscatter_prob) {
  if (!(wavelength > 0.0))
    throw invalid_parameter_error("EventSampler1D: wavelength <= 0");
  check_angle_bins(angle_bins);
  bin_width_ = kTwoPi / bins_;
  build(state);
}

void EventSampler1D::build(const Wavefunction1D& state) {
  const int n = state.size();
  const Fold fold(n, state.dx());
  std::vector<double> mass(fold.pairs);
  for (int r = 0; r < fold.pairs; ++r) {
    const double cl = state.amplitudes[fold.lower(r, n)];
    const double cu = state.amplitudes[fold.upper(r, n)];
    mass[r] = (cl * cl + cu * cu) * state.dx();
  }
  double centre_mass = 0.0;
  if (fold.centre >= 0) {
    const double cc = state.amplitudes[fold.centre];
    centre_mass = cc * cc * state.dx();
  }

  // P_S(theta) = (1 + D((4 pi/lambda) sin theta)) / (4 pi) with D the
  // cosine transform of the density. D is evaluated exactly on a uniform
  // q grid fine enough that cubic interpolation onto the angle bins stays
  // below ~1e-7 absolute, far under any statistical resolution.
  const double q_max = 2.0 * kTwoPi / wavelength_;
  const double dq = 0.05 / state.half_width;
  const int count = static_cast<int>(q_max / dq) + 4;
  const std::vector<double> dgrid = cosine_transform_grid(
      mass, fold.x0, fold.step, centre_mass, dq, count);

  const auto sines = quarter_sines(bins_);
  const int quarter = bins_ / 4;
  std::vector<double> pquad(quarter);
  for (int r = 0; r < quarter; ++r) {
    const double d = cubic_even_table(dgrid, dq, q_max * sines[r]);
    pquad[r] = std::max((1.0 + d) / (2.0 * kTwoPi), 0.0);
  }
  density_.resize(bins_);
  for (int i = 0; i < bins_; ++i) {
    const int quadrant = i / quarter, r = i % quarter;
    density_[i] = (quadrant % 2 == 0) ? pquad[r] : pquad[quarter - 1 - r];
  }

  // Normalised CDF of the scattered branch; the nonscattered mass is
  // folded into the branch probability so the discretised model is a
  // proper distribution.
  cdf_.resize(bins_ + 1);
  cdf_[0] = 0.0;
  double total = 0.0;
  for (int i = 0; i < bins_; ++i) {
    total += density_[i] * bin_width_;
    cdf_[i + 1] = total;
  }
  if (!(total > 0.0))
    throw invalid_parameter_error("EventSampler1D: zero scattering mass");
  const double grand = p_ns_ + total;
  p_ns_ /= grand;
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

ScatterOutcome1D sample_event(const Wavefunction1D& state, double wavelength,
                              RandomStream& rng, int angle_bins) {
  return EventSampler1D(state, wavelength, angle_bins).draw(rng);
}

ScatterOutcome1D EventSampler1D::draw(RandomStream& rng) const {
  if (rng.uniform() < p_ns_)
    return {EventKind::NonScattered, 0.0, wavelength_};
  const double u = std::min(rng.uniform(), 0x1.fffffffffffffp-1);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  i = std::min(std::max<std::size_t>(i, 1), cdf_.size() - 1) - 1;
  while (i + 1 < cdf_.size() - 1 && cdf_[i + 1] <= cdf_[i]) ++i;
  const double w = cdf_[i + 1] - cdf_[i];
  const double frac = w > 0.0 ? (u - cdf_[i]) / w : 0.5;
  const double theta = (static_cast<double>(i) + frac) * bin_width_;
  return {EventKind::Scattered, theta, wavelength_};
}

namespace {

void apply_scatter_in_place(Wavefunction1D& state, double theta,
                            double wavelength) {
  const int n = state.size();
  const Fold fold(n, state.dx());
  const double k = kTwoPi * std::sin(theta) / wavelength;
  for (int r = 0; r < fold.pairs; ++r) {
    const double m = std::cos(k * fold.x_abs(r));
    state.amplitudes[fold.lower(r, n)] *= m;
    state.amplitudes[fold.upper(r, n)] *= m;
  }
  // centre multiplier cos(0) == 1
  state.renormalize();
}

template <class A2Fn>
void apply_nonscatter_in_place(Wavefunction1D& state, A2Fn&& a2_of_xabs) {
  const int n = state.size();
  const Fold fold(n, state.dx());
  for (int r = 0; r < fold.pairs; ++r) {
    const double m = std::sqrt(std::max(a2_of_xabs(fold.x_abs(r)), 0.0));
    state.amplitudes[fold.lower(r, n)] *= m;
    state.amplitudes[fold.upper(r, n)] *= m;
  }
  if (fold.centre >= 0) state.amplitudes[fold.centre] = 0.0;  // A(0) == 0
  state.renormalize();
}

}  // namespace

Wavefunction1D apply_event(const Wavefunction1D& state,
                           const ScatterOutcome1D& event, int angle_bins) {
  if (!(event.wavelength > 0.0))
    throw invalid_parameter_error("apply_event: wavelength <= 0");
  Wavefunction1D out = state;
  if (event.kind == EventKind::Scattered) {
    apply_scatter_in_place(out, event.theta, event.wavelength);
  } else {
    const auto sines = quarter_sines(angle_bins);
    apply_nonscatter_in_place(out, [&](double xa) {
      return a2_from_sines(xa, event.wavelength, sines);
    });
  }
  return out;
}

LocalisationEngine1D::LocalisationEngine1D(int samples, double half_width,
                                           int angle_bins)
    : samples_(samples), half_width_(half_width), angle_bins_(angle_bins) {
  if (samples < 2)
    throw invalid_dimension_error("LocalisationEngine1D: need >= 2 samples");
  if (!(half_width > 0.0))
    throw invalid_dimension_error("LocalisationEngine1D: half_width <= 0");
  check_angle_bins(angle_bins);
}

void LocalisationEngine1D::prepare(const SpectralSource& source) {
  const Fold fold(samples_, 2.0 * half_width_ / samples_);
  if (source.is_monochromatic()) {
    const double lambda = source.min_wavelength();
    if (!a2_grid_.empty() && mono_wavelength_ == lambda) return;
    const auto sines = quarter_sines(angle_bins_);
    a2_grid_.resize(fold.pairs);
    for (int r = 0; r < fold.pairs; ++r)
      a2_grid_[r] = a2_from_sines(fold.x_abs(r), lambda, sines);
    mono_wavelength_ = lambda;
    return;
  }
  // Polychromatic: A^2 depends on x and lambda only through u = x/lambda,
  // so one table covers the whole band. Step chosen for ~1e-9 cubic
  // interpolation error against the quadrature it tabulates.
  const double u_max = half_width_ / source.min_wavelength();
  const double step = 9e-4;
  const int count = static_cast<int>(u_max / step) + 5;
  if (!a2_u_.empty() && u_step_ == step &&
      static_cast<int>(a2_u_.size()) >= count)
    return;
  const auto sines = quarter_sines(angle_bins_);
  a2_u_.resize(count);
  for (int i = 0; i < count; ++i)
    a2_u_[i] = a2_from_sines(i * step, 1.0, sines);
  u_step_ = step;
}

double LocalisationEngine1D::a2_at(double x_abs, double wavelength) const {
  if (!a2_grid_.empty() && wavelength == mono_wavelength_) {
    const Fold fold(samples_, 2.0 * half_width_ / samples_);
    const int r = static_cast<int>((x_abs - fold.x0) / fold.step + 0.5);
    return a2_grid_[std::clamp(r, 0, fold.pairs - 1)];
  }
  return std::max(cubic_even_table(a2_u_, u_step_, x_abs / wavelength), 0.0);
}

double LocalisationEngine1D::nonscatter_prob_cached(const Wavefunction1D& state,
                                                    double wavelength) {
  const int n = state.size();
  const Fold fold(n, state.dx());
  double acc = 0.0;
  for (int r = 0; r < fold.pairs; ++r) {
    const double cl = state.amplitudes[fold.lower(r, n)];
    const double cu = state.amplitudes[fold.upper(r, n)];
    acc += (cl * cl + cu * cu) * a2_at(fold.x_abs(r), wavelength);
  }
  return std::clamp(acc * state.dx(), 0.0, 1.0);
}

void LocalisationEngine1D::apply_in_place(Wavefunction1D& state,
                                          const ScatterOutcome1D& event) {
  if (event.kind == EventKind::Scattered) {
    apply_scatter_in_place(state, event.theta, event.wavelength);
  } else {
    apply_nonscatter_in_place(
        state, [&](double xa) { return a2_at(xa, event.wavelength); });
  }
}

LocalisationResult LocalisationEngine1D::run(int photons,
                                             const SpectralSource& source,
                                             RandomStream& rng) {
  return run(flat_state(half_width_, samples_), photons, source, rng);
}

LocalisationResult LocalisationEngine1D::run(const Wavefunction1D& initial,
                                             int photons,
                                             const SpectralSource& source,
                                             RandomStream& rng) {
  if (photons < 0)
    throw invalid_parameter_error("run_localisation: photons < 0");
  if (initial.size() != samples_ || initial.half_width != half_width_)
    throw invalid_dimension_error("run_localisation: state does not match engine grid");
  prepare(source);
  LocalisationResult result{initial, EventLog1D{rng.seed(), {}}};
  result.log.events.reserve(static_cast<std::size_t>(photons));
  for (int i = 0; i < photons; ++i) {
    const double lambda = source.draw(rng);
    const double p_ns = nonscatter_prob_cached(result.state, lambda);
    EventSampler1D sampler(result.state, lambda, angle_bins_, p_ns);
    const ScatterOutcome1D outcome = sampler.draw(rng);
    apply_in_place(result.state, outcome);
    result.log.events.push_back(outcome);
  }
  return result;
}

LocalisationResult run_localisation(const Wavefunction1D& initial, int photons,
                                    const SpectralSource& source,
                                    RandomStream& rng) {
  LocalisationEngine1D engine(initial.size(), initial.half_width);
  return engine.run(initial, photons, source, rng);
}

std::vector<double> position_density(const Wavefunction1D& state) {
  std::vector<double> d(state.amplitudes.size());
  for (std::size_t j = 0; j < d.size(); ++j)
    d[j] = state.amplitudes[j] * state.amplitudes[j];
  return d;
}

std::vector<double> uniform_momentum_grid(double p_max, int points) {
  if (points < 2 || !(p_max > 0.0))
    throw invalid_grid_error("momentum grid: need p_max > 0 and >= 2 points");
  const double step = 2.0 * p_max / (points - 1);
  std::vector<double> p(points);
  for (int k = 0; k < points; ++k) p[k] = symmetric_coord(k, points, step);
  return p;
}

namespace {

void check_momentum_grid(const std::vector<double>& p) {
  const int n = static_cast<int>(p.size());
  if (n < 2) throw invalid_grid_error("momentum grid: fewer than 2 points");
  const double step = p[1] - p[0];
  if (!(step > 0.0))
    throw invalid_grid_error("momentum grid: not strictly increasing");
  const double tol = 1e-9 * (std::abs(p.back() - p.front()) + 1.0);
  for (int k = 1; k < n; ++k)
    if (std::abs(p[k] - p[k - 1] - step) > tol)
      throw invalid_grid_error("momentum grid: not uniform");
  for (int k = 0; k < n; ++k)
    if (std::abs(p[k] + p[n - 1 - k]) > tol)
      throw invalid_grid_error("momentum grid: not symmetric about 0");
}

}  // namespace

MomentumDensity momentum_density(const Wavefunction1D& state,
                                 const std::vector<double>& p_grid) {
  check_momentum_grid(p_grid);
  const int n = state.size();
  const int np = static_cast<int>(p_grid.size());
  const double dx = state.dx();
  const double x0 = state.x(0);

  MomentumDensity out;
  out.p = p_grid;
  out.q.assign(np, 0.0);
  // c(x) is real, so Q(-p) == Q(p): transform the p >= 0 half and mirror.
  for (int k = np / 2; k < np; ++k) {
    const double p = p_grid[k];
    double c = std::cos(-kTwoPi * p * x0), s = std::sin(-kTwoPi * p * x0);
    const double ca = std::cos(-kTwoPi * p * dx), sa = std::sin(-kTwoPi * p * dx);
    double re = 0.0, im = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = state.amplitudes[j];
      re += a * c;
      im += a * s;
      const double cn = c * ca - s * sa;
      s = s * ca + c * sa;
      c = cn;
    }
    out.q[k] = (re * re + im * im) * dx * dx;
    out.q[np - 1 - k] = out.q[k];
  }
  const double dp = p_grid[1] - p_grid[0];
  double total = 0.0;
  for (const double q : out.q) total += q * dp;
  if (total > 0.0)
    for (double& q : out.q) q /= total;
  return out;
}

HalfMoments half_moments(std::span<const double> density, double half_width,
                         Side side) {
  const int n = static_cast<int>(density.size());
  if (n < 2 || !(half_width > 0.0))
    throw invalid_dimension_error("half_moments: bad density grid");
  const double dx = 2.0 * half_width / n;
  HalfMoments m;
  double m1 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = symmetric_coord(j, n, dx);
    if (side == Side::Left ? x < 0.0 : x > 0.0) {
      m.mass += density[j] * dx;
      m1 += density[j] * x * dx;
    }
  }
  if (m.mass < 1e-12)
    throw empty_half_error("half_moments: restricted mass below 1e-12");
  m.mean = m1 / m.mass;
  double m2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double x = symmetric_coord(j, n, dx);
    if (side == Side::Left ? x < 0.0 : x > 0.0) {
      const double dev = x - m.mean;
      m2 += density[j] * dev * dev * dx;
    }
  }
  m.variance = m2 / m.mass;
  return m;
}

double peak_variance(std::span<const double> density, double half_width,
                     Side side) {
  return half_moments(density, half_width, side).variance;
}

}  // namespace relloc
