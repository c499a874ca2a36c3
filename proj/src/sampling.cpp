#include "relloc/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "relloc/errors.hpp"

namespace relloc {

CellSampler::CellSampler(std::vector<double> weights, double x0, double dx)
    : x0_(x0), dx_(dx) {
  if (weights.empty()) throw invalid_parameter_error("CellSampler: no cells");
  cdf_.resize(weights.size() + 1);
  cdf_[0] = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0))
      throw invalid_parameter_error("CellSampler: negative or NaN weight");
    acc += weights[i];
    cdf_[i + 1] = acc;
  }
  if (acc <= 0.0)
    throw invalid_parameter_error("CellSampler: total mass is zero");
  for (auto& c : cdf_) c /= acc;
  cdf_.back() = 1.0;  // exact endpoints regardless of rounding
}

std::size_t CellSampler::index_at(double u, double* frac) const {
  u = std::min(std::max(u, 0.0), 0x1.fffffffffffffp-1);
  // first edge strictly greater than u; cell = edge-1
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  i = std::min(std::max<std::size_t>(i, 1), cdf_.size() - 1) - 1;
  // skip zero-mass cells the search may have landed on
  while (i + 1 < cdf_.size() - 1 && cdf_[i + 1] <= cdf_[i]) ++i;
  if (frac) {
    const double w = cdf_[i + 1] - cdf_[i];
    *frac = w > 0.0 ? std::min((u - cdf_[i]) / w, 0x1.fffffffffffffp-1) : 0.5;
  }
  return i;
}

double CellSampler::value_at(double u) const {
  double frac = 0.0;
  const std::size_t i = index_at(u, &frac);
  return x0_ + (static_cast<double>(i) + frac) * dx_;
}

}  // namespace relloc
