#include "spectsim/projection.hpp"

#include <cmath>
#include <numeric>

#include "spectsim/errors.hpp"

namespace spectsim {

std::string to_string(CountKind kind) {
  return kind == CountKind::expected_counts ? "expected_counts" : "sampled_counts";
}

CountKind count_kind_from_string(const std::string& text) {
  if (text == "expected_counts") return CountKind::expected_counts;
  if (text == "sampled_counts") return CountKind::sampled_counts;
  throw ValidationError("unknown projection kind '" + text + "'");
}

ProjectionSet::ProjectionSet(std::size_t views, std::size_t rows, std::size_t bins, std::vector<double> angles,
                             CountKind k)
    : n_views(views), n_rows(rows), n_bins(bins), angles_deg(std::move(angles)), data(views * rows * bins, 0.0F), kind(k) {
  require(angles_deg.size() == n_views, "angles list length must equal n_views");
}

double ProjectionSet::sum() const {
  return std::accumulate(data.begin(), data.end(), 0.0, [](double a, float v) { return a + static_cast<double>(v); });
}

double ProjectionSet::view_sum(std::size_t v) const {
  const auto s = view(v);
  return std::accumulate(s.begin(), s.end(), 0.0, [](double a, float x) { return a + static_cast<double>(x); });
}

void ProjectionSet::validate() const {
  require(n_views > 0 && n_rows > 0 && n_bins > 0, "projection dims must be positive");
  require(angles_deg.size() == n_views, "angles list length must equal n_views");
  require(data.size() == n_views * n_rows * n_bins, "projection data length does not match dims");
  for (float v : data) {
    require(std::isfinite(v) && v >= 0.0F, "projection values must be finite and >= 0");
    if (kind == CountKind::sampled_counts) {
      require(std::floor(v) == v, "sampled counts must be integers");
    }
  }
}

}  // namespace spectsim
