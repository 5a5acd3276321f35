#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "spectsim/phantom.hpp"
#include "spectsim/volume.hpp"

namespace spectsim {

struct MetricReport {
  double nsd = 0.0;
  double roi_mean = 0.0;
  double roi_std = 0.0;
  std::size_t n_pixels = 0;
  std::optional<double> rmse_vs_reference;
};

/// Statistics of a sample of ROI values; nsd = roi_std / roi_mean.
MetricReport nsd_of(std::span<const double> values);

/// Normalized standard deviation over an ROI: sample standard deviation
/// (n - 1 denominator) divided by the mean. A single-pixel ROI has std 0.
MetricReport nsd(const Volume3D& volume, const RoiMask& roi);

double rmse(const Volume3D& volume, const Volume3D& reference);

}  // namespace spectsim
