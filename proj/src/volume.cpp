#include "spectsim/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spectsim/errors.hpp"

namespace spectsim {

namespace {
void validate_geometry(const GridDims& dims, double voxel_size_mm) {
  require(dims.nx > 0 && dims.ny > 0 && dims.nz > 0, "volume dims must be positive");
  require(std::isfinite(voxel_size_mm) && voxel_size_mm > 0.0, "voxel size must be positive");
}
}  // namespace

Volume3D::Volume3D(GridDims dims, double voxel_size_mm, float fill)
    : dims_(dims), voxel_size_mm_(voxel_size_mm) {
  validate_geometry(dims, voxel_size_mm);
  data_.assign(dims.voxel_count(), fill);
}

Volume3D::Volume3D(GridDims dims, double voxel_size_mm, std::vector<float> data)
    : dims_(dims), voxel_size_mm_(voxel_size_mm), data_(std::move(data)) {
  validate_geometry(dims, voxel_size_mm);
  require(data_.size() == dims.voxel_count(),
          "volume data length " + std::to_string(data_.size()) + " does not match dims (" +
              std::to_string(dims.voxel_count()) + " voxels)");
}

Volume3D Volume3D::extract_slice(std::size_t z) const {
  require(z < dims_.nz, "slice index out of range");
  const auto src = slice(z);
  return {GridDims{dims_.nx, dims_.ny, 1}, voxel_size_mm_, std::vector<float>(src.begin(), src.end())};
}

bool Volume3D::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Volume3D::all_nonnegative() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return v >= 0.0F; });
}

double Volume3D::sum() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0,
                         [](double acc, float v) { return acc + static_cast<double>(v); });
}

float Volume3D::max_value() const {
  return data_.empty() ? 0.0F : *std::max_element(data_.begin(), data_.end());
}

bool Volume3D::same_geometry(const Volume3D& other) const {
  return dims_ == other.dims_ && voxel_size_mm_ == other.voxel_size_mm_;
}

}  // namespace spectsim
