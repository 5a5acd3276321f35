#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spectsim {

enum class CountKind { expected_counts, sampled_counts };

std::string to_string(CountKind kind);
CountKind count_kind_from_string(const std::string& text);

/// Gamma-camera data stored [view][row][bin].
struct ProjectionSet {
  std::size_t n_views = 0;
  std::size_t n_rows = 0;
  std::size_t n_bins = 0;
  std::vector<double> angles_deg;
  std::vector<float> data;
  CountKind kind = CountKind::expected_counts;

  ProjectionSet() = default;
  ProjectionSet(std::size_t views, std::size_t rows, std::size_t bins, std::vector<double> angles,
                CountKind k = CountKind::expected_counts);

  [[nodiscard]] std::size_t view_size() const { return n_rows * n_bins; }
  [[nodiscard]] std::size_t index(std::size_t view, std::size_t row, std::size_t bin) const {
    return (view * n_rows + row) * n_bins + bin;
  }
  float& at(std::size_t view, std::size_t row, std::size_t bin) { return data[index(view, row, bin)]; }
  [[nodiscard]] float at(std::size_t view, std::size_t row, std::size_t bin) const {
    return data[index(view, row, bin)];
  }
  std::span<float> view(std::size_t v) { return {data.data() + v * view_size(), view_size()}; }
  [[nodiscard]] std::span<const float> view(std::size_t v) const {
    return {data.data() + v * view_size(), view_size()};
  }

  [[nodiscard]] double sum() const;
  [[nodiscard]] double view_sum(std::size_t v) const;

  /// Throws ValidationError on size mismatch, negative or non-finite values,
  /// or non-integer entries in sampled data.
  void validate() const;
};

}  // namespace spectsim
