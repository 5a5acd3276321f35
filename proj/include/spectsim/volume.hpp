#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spectsim {

struct GridDims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  [[nodiscard]] std::size_t voxel_count() const { return nx * ny * nz; }
  [[nodiscard]] std::size_t slice_size() const { return nx * ny; }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Regular 3-D scalar grid stored [z][y][x] (z slowest) with isotropic voxels.
class Volume3D {
public:
  Volume3D() = default;
  Volume3D(GridDims dims, double voxel_size_mm, float fill = 0.0F);
  Volume3D(GridDims dims, double voxel_size_mm, std::vector<float> data);

  [[nodiscard]] const GridDims& dims() const { return dims_; }
  [[nodiscard]] double voxel_size_mm() const { return voxel_size_mm_; }
  [[nodiscard]] double voxel_size_cm() const { return voxel_size_mm_ / 10.0; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * dims_.ny + y) * dims_.nx + x;
  }
  float& at(std::size_t z, std::size_t y, std::size_t x) { return data_[index(z, y, x)]; }
  [[nodiscard]] float at(std::size_t z, std::size_t y, std::size_t x) const {
    return data_[index(z, y, x)];
  }

  std::span<float> data() { return data_; }
  [[nodiscard]] std::span<const float> data() const { return data_; }
  std::span<float> slice(std::size_t z) { return {data_.data() + z * dims_.slice_size(), dims_.slice_size()}; }
  [[nodiscard]] std::span<const float> slice(std::size_t z) const {
    return {data_.data() + z * dims_.slice_size(), dims_.slice_size()};
  }

  /// Copies one axial slice into a new single-slice volume (dims nx, ny, 1).
  [[nodiscard]] Volume3D extract_slice(std::size_t z) const;

  [[nodiscard]] bool all_finite() const;
  [[nodiscard]] bool all_nonnegative() const;
  [[nodiscard]] double sum() const;
  [[nodiscard]] float max_value() const;

  [[nodiscard]] bool same_geometry(const Volume3D& other) const;

private:
  GridDims dims_{};
  double voxel_size_mm_ = 1.0;
  std::vector<float> data_;
};

}  // namespace spectsim
