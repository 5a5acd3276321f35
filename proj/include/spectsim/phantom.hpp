#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spectsim/volume.hpp"

namespace spectsim {

using Vec3 = std::array<double, 3>;

struct Ellipsoid {
  Vec3 center_mm{0.0, 0.0, 0.0};
  Vec3 semi_axes_mm{1.0, 1.0, 1.0};
  double z_rotation_deg = 0.0;

  /// Analytic membership of a point given in phantom coordinates (mm,
  /// origin at the volume center).
  [[nodiscard]] bool contains(const Vec3& point_mm) const;
};

struct OrganSpec {
  std::string name;
  Ellipsoid shape;
  double uptake = 0.0;  // relative activity
  double mu = 0.0;      // cm^-1 at 140 keV
  int priority = 0;     // higher wins on overlap; ties go to the earlier organ
};

struct PhantomSpec {
  GridDims grid_dims{128, 128, 114};
  double voxel_size_mm = 4.0;
  std::vector<OrganSpec> organs;
  double background_uptake = 0.0;
  double background_mu = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError if any invariant is violated.
  void validate() const;

  /// Physical coordinate (mm) of a voxel center, origin at the grid center.
  [[nodiscard]] Vec3 voxel_center_mm(std::size_t z, std::size_t y, std::size_t x) const;

  [[nodiscard]] const OrganSpec* find_organ(const std::string& name) const;
};

struct PhantomVolumes {
  Volume3D activity;
  Volume3D mu;
};

/// Torso template standing in for an anthropomorphic phantom: body, lungs,
/// liver, heart wall with blood pool, and spine. Default grid 128x128x114 at 4 mm.
PhantomSpec default_torso_spec();

/// Same template rescaled to an arbitrary grid; organs keep their mm sizes.
PhantomSpec torso_spec(GridDims dims, double voxel_size_mm);

PhantomVolumes generate_phantom(const PhantomSpec& spec);

/// Per-patient variability: every organ's semi-axes are scaled by independent
/// factors drawn from [semi_axis_lo, semi_axis_hi] and its uptake by a factor
/// from [uptake_lo, uptake_hi].
struct PopulationRanges {
  double semi_axis_lo = 0.85;
  double semi_axis_hi = 1.15;
  double uptake_lo = 0.8;
  double uptake_hi = 1.2;
};

std::vector<PhantomSpec> sample_population(const PhantomSpec& base, std::size_t n, std::uint64_t seed,
                                           const PopulationRanges& ranges = {});

struct RoiMask {
  std::size_t slice_index = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pixels;  // (y, x)

  /// Throws ValidationError if a pixel is out of bounds or duplicated.
  void validate(const GridDims& dims) const;
};

inline constexpr std::size_t kLiverRoiPixels = 82;

/// Connected ROI of `pixel_count` pixels grown breadth-first from the pixel
/// nearest the liver center. Every pixel center lies inside the liver ellipsoid.
RoiMask liver_roi(const PhantomSpec& spec, std::size_t slice_index, std::size_t pixel_count = kLiverRoiPixels);

/// Axial slice through the liver center, clamped to the grid.
std::size_t mid_liver_slice(const PhantomSpec& spec);

}  // namespace spectsim
