#pragma once
#include <span>
#include <vector>

#include "relloc/wave1d.hpp"

namespace relloc {

struct DensityPeak {
  int index = 0;
  double x = 0.0;
  double value = 0.0;
};

/// Local maxima of `values` above threshold_frac * global max. A plateau
/// counts once (strictly above the left neighbour, at least the right);
/// boundary cells are eligible with the missing neighbour taken as -inf.
std::vector<DensityPeak> find_peaks(std::span<const double> values, double x0,
                                    double dx, double threshold_frac);

/// Peaks of a position density on the symmetric cell-centred grid.
std::vector<DensityPeak> find_density_peaks(std::span<const double> density,
                                            double half_width,
                                            double threshold_frac = 0.1);

/// Mean spacing of fringe maxima of a momentum density, taken over peaks
/// above threshold_frac of the global max within |p| <= window (window 0
/// means the whole grid). Returns NaN when fewer than two maxima qualify.
double fringe_period(const MomentumDensity& density,
                     double threshold_frac = 0.1, double window = 0.0);

/// Fringe contrast (max - min)/(max + min) over one period centred on the
/// global maximum.
double fringe_contrast(const MomentumDensity& density, double period);

/// Least-squares slope of log(y) against log(x); inputs must be positive.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace relloc
