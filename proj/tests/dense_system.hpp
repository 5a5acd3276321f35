#pragma once

#include <vector>

#include "spectsim/recon.hpp"

namespace spectsim::testing {

/// Explicit matrix system: one measurement per view, row-major A.
class DenseSystem final : public EmSystem {
public:
  DenseSystem(std::size_t rows, std::size_t cols, std::vector<double> a) : rows_(rows), cols_(cols), a_(std::move(a)) {}

  [[nodiscard]] std::size_t image_size() const override { return cols_; }
  [[nodiscard]] std::size_t n_views() const override { return rows_; }
  [[nodiscard]] std::size_t view_size() const override { return 1; }

  void forward(std::span<const float> x, std::span<const std::size_t> views, std::span<float> y) const override {
    for (std::size_t i : views) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += a_[i * cols_ + j] * x[j];
      y[i] = static_cast<float>(s);
    }
  }

  void back(std::span<const float> y, std::span<const std::size_t> views, std::span<float> x) const override {
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i : views) s += a_[i * cols_ + j] * y[i];
      x[j] = static_cast<float>(s);
    }
  }

  [[nodiscard]] double a(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> a_;
};

}  // namespace spectsim::testing
