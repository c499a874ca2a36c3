#pragma once
#include <cstddef>
#include <vector>

#include "relloc/rng.hpp"

namespace relloc {

/// Inverse-CDF sampler for a density tabulated on uniform cells.
/// The density is treated as piecewise constant; the CDF is therefore
/// piecewise linear and draws interpolate linearly within the chosen cell.
/// Shared by the scattering-angle, blackbody-wavelength, momentum and
/// point-cloud samplers. Immutable after construction, safe to share
/// across threads (each thread brings its own RandomStream).
class CellSampler {
 public:
  /// `weights` are nonnegative relative cell masses (they are normalised
  /// internally); cell i spans [x0 + i*dx, x0 + (i+1)*dx).
  CellSampler(std::vector<double> weights, double x0, double dx);

  /// Cell index for uniform variate u in [0,1); `frac` (if non-null)
  /// receives the position within the cell, in [0,1).
  std::size_t index_at(double u, double* frac = nullptr) const;

  /// Value for uniform variate u (deterministic; the monotone inverse CDF).
  double value_at(double u) const;

  double draw(RandomStream& rng) const { return value_at(rng.uniform()); }
  std::size_t draw_index(RandomStream& rng, double* frac = nullptr) const {
    return index_at(rng.uniform(), frac);
  }

  std::size_t cells() const { return cdf_.size() - 1; }
  /// Monotone CDF at cell edges; cdf().front()==0, cdf().back()==1.
  const std::vector<double>& cdf() const { return cdf_; }

 private:
  std::vector<double> cdf_;  // size cells+1
  double x0_, dx_;
};

}  // namespace relloc
