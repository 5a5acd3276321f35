#include "spectsim/metrics.hpp"

#include <cmath>
#include <vector>

#include "spectsim/errors.hpp"

namespace spectsim {

MetricReport nsd_of(std::span<const double> values) {
  require(!values.empty(), "ROI is empty");
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / n;
  require(mean > 0.0, "ROI mean must be > 0 for NSD");

  // Two-pass variance.
  double ss = 0.0;
  for (double v : values) {
    ss += (v - mean) * (v - mean);
  }
  const double variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;

  MetricReport report;
  report.roi_mean = mean;
  report.roi_std = std::sqrt(variance);
  report.nsd = report.roi_std / mean;
  report.n_pixels = values.size();
  return report;
}

MetricReport nsd(const Volume3D& volume, const RoiMask& roi) {
  require(!roi.pixels.empty(), "ROI is empty");
  roi.validate(volume.dims());
  std::vector<double> values;
  values.reserve(roi.pixels.size());
  for (const auto& [y, x] : roi.pixels) {
    values.push_back(static_cast<double>(volume.at(roi.slice_index, y, x)));
  }
  return nsd_of(values);
}

double rmse(const Volume3D& volume, const Volume3D& reference) {
  require(volume.dims() == reference.dims(), "rmse requires volumes with matching dims");
  const auto a = volume.data();
  const auto b = reference.data();
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace spectsim
