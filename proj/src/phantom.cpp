#include "spectsim/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <set>
#include <string>

#include "spectsim/errors.hpp"
#include "spectsim/philox.hpp"

namespace spectsim {

bool Ellipsoid::contains(const Vec3& point_mm) const {
  const double dx = point_mm[0] - center_mm[0];
  const double dy = point_mm[1] - center_mm[1];
  const double dz = point_mm[2] - center_mm[2];
  const double theta = z_rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // Rotate the point into the ellipsoid's own frame.
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  const double qu = u / semi_axes_mm[0];
  const double qv = v / semi_axes_mm[1];
  const double qz = dz / semi_axes_mm[2];
  return qu * qu + qv * qv + qz * qz <= 1.0;
}

void PhantomSpec::validate() const {
  require(grid_dims.nx > 0 && grid_dims.ny > 0 && grid_dims.nz > 0, "phantom grid_dims must be positive");
  require(std::isfinite(voxel_size_mm) && voxel_size_mm > 0.0, "phantom voxel_size_mm must be positive");
  require(std::isfinite(background_uptake) && background_uptake >= 0.0, "background_uptake must be >= 0");
  require(std::isfinite(background_mu) && background_mu >= 0.0, "background_mu must be >= 0");
  for (const auto& organ : organs) {
    const std::string where = "organ '" + organ.name + "': ";
    for (double a : organ.shape.semi_axes_mm) {
      require(std::isfinite(a) && a > 0.0, where + "semi_axes_mm must be > 0");
    }
    for (double c : organ.shape.center_mm) {
      require(std::isfinite(c), where + "center_mm must be finite");
    }
    require(std::isfinite(organ.shape.z_rotation_deg), where + "z_rotation_deg must be finite");
    require(std::isfinite(organ.uptake) && organ.uptake >= 0.0, where + "uptake must be >= 0");
    require(std::isfinite(organ.mu) && organ.mu >= 0.0, where + "mu must be >= 0");
  }
}

Vec3 PhantomSpec::voxel_center_mm(std::size_t z, std::size_t y, std::size_t x) const {
  auto coord = [this](std::size_t i, std::size_t n) {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * voxel_size_mm;
  };
  return {coord(x, grid_dims.nx), coord(y, grid_dims.ny), coord(z, grid_dims.nz)};
}

const OrganSpec* PhantomSpec::find_organ(const std::string& name) const {
  const auto it = std::find_if(organs.begin(), organs.end(), [&](const OrganSpec& o) { return o.name == name; });
  return it == organs.end() ? nullptr : &*it;
}

PhantomSpec torso_spec(GridDims dims, double voxel_size_mm) {
  PhantomSpec spec;
  spec.grid_dims = dims;
  spec.voxel_size_mm = voxel_size_mm;
  spec.background_uptake = 0.0;
  spec.background_mu = 0.0;
  // x: patient right (-) to left (+); y: anterior (-) to posterior (+); z: feet (-) to head (+).
  constexpr double kSoftTissue = 0.154;
  constexpr double kLung = 0.04;
  constexpr double kBone = 0.25;
  spec.organs = {
      {"body", {{0.0, 0.0, 0.0}, {170.0, 115.0, 600.0}, 0.0}, 0.2, kSoftTissue, 0},
      {"lung_right", {{-75.0, -5.0, 85.0}, {55.0, 70.0, 105.0}, 0.0}, 0.3, kLung, 1},
      {"lung_left", {{75.0, -5.0, 85.0}, {50.0, 68.0, 100.0}, 0.0}, 0.3, kLung, 1},
      {"spine", {{0.0, 88.0, 0.0}, {18.0, 18.0, 600.0}, 0.0}, 0.2, kBone, 2},
      {"heart_wall", {{25.0, -35.0, 45.0}, {50.0, 42.0, 55.0}, -30.0}, 2.0, kSoftTissue, 2},
      {"heart_blood", {{25.0, -35.0, 45.0}, {35.0, 28.0, 40.0}, -30.0}, 0.4, kSoftTissue, 3},
      {"liver", {{-55.0, 5.0, -70.0}, {85.0, 75.0, 65.0}, 20.0}, 1.0, kSoftTissue, 3},
  };
  return spec;
}

PhantomSpec default_torso_spec() { return torso_spec({128, 128, 114}, 4.0); }

PhantomVolumes generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const GridDims& dims = spec.grid_dims;
  Volume3D activity(dims, spec.voxel_size_mm);
  Volume3D mu(dims, spec.voxel_size_mm);
  const auto nz = static_cast<std::ptrdiff_t>(dims.nz);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t zi = 0; zi < nz; ++zi) {
    const auto z = static_cast<std::size_t>(zi);
    for (std::size_t y = 0; y < dims.ny; ++y) {
      for (std::size_t x = 0; x < dims.nx; ++x) {
        const Vec3 p = spec.voxel_center_mm(z, y, x);
        const OrganSpec* winner = nullptr;
        for (const auto& organ : spec.organs) {
          if ((winner == nullptr || organ.priority > winner->priority) && organ.shape.contains(p)) {
            winner = &organ;
          }
        }
        activity.at(z, y, x) = static_cast<float>(winner ? winner->uptake : spec.background_uptake);
        mu.at(z, y, x) = static_cast<float>(winner ? winner->mu : spec.background_mu);
      }
    }
  }
  return {std::move(activity), std::move(mu)};
}

std::vector<PhantomSpec> sample_population(const PhantomSpec& base, std::size_t n, std::uint64_t seed,
                                           const PopulationRanges& ranges) {
  base.validate();
  std::vector<PhantomSpec> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PhiloxStream rng(seed, i);
    PhantomSpec spec = base;
    spec.seed = derive_seed(seed, static_cast<std::uint32_t>(i), 1);
    for (auto& organ : spec.organs) {
      for (double& axis : organ.shape.semi_axes_mm) {
        axis *= rng.uniform(ranges.semi_axis_lo, ranges.semi_axis_hi);
      }
      organ.uptake *= rng.uniform(ranges.uptake_lo, ranges.uptake_hi);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

void RoiMask::validate(const GridDims& dims) const {
  require(slice_index < dims.nz, "ROI slice index out of range");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [y, x] : pixels) {
    require(y < dims.ny && x < dims.nx, "ROI pixel out of bounds");
    require(seen.insert({y, x}).second, "ROI contains duplicate pixels");
  }
}

std::size_t mid_liver_slice(const PhantomSpec& spec) {
  const OrganSpec* liver = spec.find_organ("liver");
  require(liver != nullptr, "phantom has no organ named 'liver'");
  const double idx = liver->shape.center_mm[2] / spec.voxel_size_mm + 0.5 * static_cast<double>(spec.grid_dims.nz - 1);
  const double clamped = std::clamp(std::round(idx), 0.0, static_cast<double>(spec.grid_dims.nz - 1));
  return static_cast<std::size_t>(clamped);
}

RoiMask liver_roi(const PhantomSpec& spec, std::size_t slice_index, std::size_t pixel_count) {
  spec.validate();
  const OrganSpec* liver = spec.find_organ("liver");
  require(liver != nullptr, "phantom has no organ named 'liver'");
  const GridDims& dims = spec.grid_dims;
  require(slice_index < dims.nz, "ROI slice index " + std::to_string(slice_index) + " outside the grid");
  require(pixel_count > 0, "ROI pixel count must be positive");

  auto nearest = [&](double mm, std::size_t n) {
    const double idx = std::round(mm / spec.voxel_size_mm + 0.5 * static_cast<double>(n - 1));
    return static_cast<std::ptrdiff_t>(idx);
  };
  const std::ptrdiff_t cx = nearest(liver->shape.center_mm[0], dims.nx);
  const std::ptrdiff_t cy = nearest(liver->shape.center_mm[1], dims.ny);
  auto inside = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
    if (y < 0 || x < 0 || y >= static_cast<std::ptrdiff_t>(dims.ny) || x >= static_cast<std::ptrdiff_t>(dims.nx)) {
      return false;
    }
    return liver->shape.contains(
        spec.voxel_center_mm(slice_index, static_cast<std::size_t>(y), static_cast<std::size_t>(x)));
  };
  if (!inside(cy, cx)) {
    throw ValidationError("slice " + std::to_string(slice_index) + " does not intersect the liver center column");
  }

  RoiMask roi;
  roi.slice_index = slice_index;
  std::vector<char> visited(dims.slice_size(), 0);
  std::deque<std::pair<std::ptrdiff_t, std::ptrdiff_t>> queue{{cy, cx}};
  visited[static_cast<std::size_t>(cy) * dims.nx + static_cast<std::size_t>(cx)] = 1;
  constexpr std::array<std::pair<int, int>, 4> kNeighbours{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
  while (!queue.empty() && roi.pixels.size() < pixel_count) {
    const auto [y, x] = queue.front();
    queue.pop_front();
    roi.pixels.emplace_back(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
    for (const auto& [dy, dx] : kNeighbours) {
      const std::ptrdiff_t ny = y + dy;
      const std::ptrdiff_t nx = x + dx;
      if (!inside(ny, nx)) {
        continue;
      }
      auto& flag = visited[static_cast<std::size_t>(ny) * dims.nx + static_cast<std::size_t>(nx)];
      if (flag == 0) {
        flag = 1;
        queue.emplace_back(ny, nx);
      }
    }
  }
  if (roi.pixels.size() < pixel_count) {
    throw ValidationError("liver cross-section on slice " + std::to_string(slice_index) + " has only " +
                          std::to_string(roi.pixels.size()) + " pixels; " + std::to_string(pixel_count) +
                          " required");
  }
  return roi;
}

}  // namespace spectsim
