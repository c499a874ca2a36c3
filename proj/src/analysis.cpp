#include "relloc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relloc/errors.hpp"

namespace relloc {

std::vector<DensityPeak> find_peaks(std::span<const double> values, double x0,
                                    double dx, double threshold_frac) {
  std::vector<DensityPeak> peaks;
  const int n = static_cast<int>(values.size());
  if (n == 0) return peaks;
  const double vmax = *std::max_element(values.begin(), values.end());
  const double cut = threshold_frac * vmax;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? values[i - 1] : kNegInf;
    const double right = i + 1 < n ? values[i + 1] : kNegInf;
    if (values[i] > left && values[i] >= right && values[i] >= cut)
      peaks.push_back({i, x0 + i * dx, values[i]});
  }
  return peaks;
}

std::vector<DensityPeak> find_density_peaks(std::span<const double> density,
                                            double half_width,
                                            double threshold_frac) {
  const int n = static_cast<int>(density.size());
  const double dx = 2.0 * half_width / n;
  auto peaks = find_peaks(density, 0.0, dx, threshold_frac);
  // find_peaks indexes from x0 = 0; rebase onto the symmetric cell centres
  for (auto& p : peaks) p.x = -half_width + (p.index + 0.5) * dx;
  return peaks;
}

double fringe_period(const MomentumDensity& density, double threshold_frac,
                     double window) {
  const int n = static_cast<int>(density.q.size());
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  double vmax = 0.0;
  for (int k = 0; k < n; ++k) {
    if (window > 0.0 && std::abs(density.p[k]) > window) continue;
    vmax = std::max(vmax, density.q[k]);
  }
  const double cut = threshold_frac * vmax;
  std::vector<double> maxima;
  for (int k = 0; k < n; ++k) {
    if (window > 0.0 && std::abs(density.p[k]) > window) continue;
    const double left = k > 0 ? density.q[k - 1] : -1.0;
    const double right = k + 1 < n ? density.q[k + 1] : -1.0;
    if (density.q[k] > left && density.q[k] >= right && density.q[k] >= cut)
      maxima.push_back(density.p[k]);
  }
  if (maxima.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return (maxima.back() - maxima.front()) /
         static_cast<double>(maxima.size() - 1);
}

double fringe_contrast(const MomentumDensity& density, double period) {
  const int n = static_cast<int>(density.q.size());
  if (n == 0 || !(period > 0.0))
    return std::numeric_limits<double>::quiet_NaN();
  const int kmax = static_cast<int>(
      std::max_element(density.q.begin(), density.q.end()) -
      density.q.begin());
  const double centre = density.p[kmax];
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int k = 0; k < n; ++k) {
    if (std::abs(density.p[k] - centre) > 0.5 * period) continue;
    lo = std::min(lo, density.q[k]);
    hi = std::max(hi, density.q[k]);
  }
  if (!(hi + lo > 0.0)) return 0.0;
  return (hi - lo) / (hi + lo);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw invalid_parameter_error("loglog_slope: need matching sizes >= 2");
  const int n = static_cast<int>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw invalid_parameter_error("loglog_slope: inputs must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace relloc
