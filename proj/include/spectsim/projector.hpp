#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spectsim/projection.hpp"
#include "spectsim/volume.hpp"

namespace spectsim {

/// Parallel-hole acquisition geometry. View k sits at start_deg + k*arc_deg/n_views.
struct GeometryConfig {
  std::size_t n_views = 120;
  double arc_deg = 180.0;
  double start_deg = -45.0;
  std::size_t n_rows = 114;
  std::size_t n_bins = 128;
  double bin_size_mm = 4.0;

  [[nodiscard]] std::vector<double> angles_deg() const;
  void validate() const;
};

/// Geometry matched to a volume grid (rows = nz, bins = nx, bin size = voxel size).
GeometryConfig geometry_for(const Volume3D& volume, std::size_t n_views = 120, double arc_deg = 180.0,
                            double start_deg = -45.0);

/// Depth-dependent Gaussian collimator-detector response.
/// sigma(d) = sigma0_mm + sigma_slope * d, d = distance to the detector face in mm.
struct PsfModel {
  double sigma0_mm = 1.6;
  double sigma_slope = 0.0125;
  double truncation_sigmas = 3.0;

  [[nodiscard]] double sigma_mm(double distance_mm) const { return sigma0_mm + sigma_slope * distance_mm; }
  [[nodiscard]] bool is_delta() const { return sigma0_mm == 0.0 && sigma_slope == 0.0; }
  void validate() const;

  static PsfModel none() { return {0.0, 0.0, 3.0}; }
};

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 * sqrt(2 ln 2)

/// Discrete normalized Gaussian in bin units. Taps k with |k| <= truncation_sigmas * sigma
/// are kept; a vanishing sigma gives the delta kernel [1].
std::vector<double> psf_kernel(double distance_mm, const PsfModel& psf, double bin_size_mm);

/// Bilinear rotation of a square n x n plane about its center. The sparse
/// interpolation weights are tabulated once per angle and reused for every slice.
class RotationTable {
public:
  RotationTable(std::size_t n, double angle_deg);

  [[nodiscard]] std::size_t size() const { return n_; }

  /// out[o] = sum_k w[o][k] * in[idx[o][k]]
  void apply(std::span<const float> in, std::span<float> out) const;
  /// Transpose of apply, accumulated: out[idx[o][k]] += w[o][k] * in[o]
  void apply_adjoint_add(std::span<const float> in, std::span<float> out) const;
  void apply_adjoint_add(std::span<const float> in, std::span<double> out) const;

private:
  struct Taps {
    std::uint32_t idx[4];
    float w[4];
  };
  std::size_t n_;
  std::vector<Taps> taps_;
};

/// Angle reduced to [0, 360).
double normalize_angle_deg(double angle_deg);

std::vector<float> rotate_slice(std::span<const float> plane, std::size_t n, double angle_deg);
std::vector<float> rotate_slice_adjoint(std::span<const float> plane, std::size_t n, double angle_deg);

/// Rotation-based attenuated projector with depth-dependent PSF and its exact
/// adjoint. After rotating to a view, the detector faces the high-y side of
/// the rotated grid; depth plane y lies (ny - y - 0.5) voxels from it.
///
/// Forward: parallel over views (disjoint outputs). Back: views in fixed
/// order, each view parallel over slices. Both are bitwise independent of the
/// thread count.
class Projector {
public:
  struct Options {
    /// Keep per-view attenuation factors in memory when they fit in this
    /// many bytes; otherwise they are recomputed on every call.
    std::size_t attenuation_cache_bytes = std::size_t{1} << 31;
  };

  Projector(const Volume3D& mu, std::vector<double> angles_deg, const PsfModel& psf);
  Projector(const Volume3D& mu, std::vector<double> angles_deg, const PsfModel& psf, Options options);

  [[nodiscard]] std::size_t n_views() const { return angles_.size(); }
  [[nodiscard]] const std::vector<double>& angles_deg() const { return angles_; }
  [[nodiscard]] const GridDims& dims() const { return dims_; }
  [[nodiscard]] double voxel_size_mm() const { return voxel_size_mm_; }
  [[nodiscard]] std::size_t view_size() const { return dims_.nz * dims_.nx; }
  [[nodiscard]] bool models_psf() const { return !psf_delta_; }
  [[nodiscard]] bool attenuation_cached() const { return !att_cache_.empty(); }

  /// Writes the listed views of `out` (each view_size() floats, [row][bin]).
  /// Views not listed are left untouched.
  void forward(std::span<const float> activity, std::span<const std::size_t> views, std::span<float> out) const;
  /// Accumulates the adjoint of the listed views into `out` (overwritten).
  void back(std::span<const float> proj, std::span<const std::size_t> views, std::span<float> out) const;

  [[nodiscard]] std::vector<std::size_t> all_views() const;

private:
  void attenuation_for_view(std::size_t view, std::span<float> att) const;
  [[nodiscard]] std::span<const float> cached_attenuation(std::size_t view) const;
  void forward_view(std::span<const float> activity, std::size_t view, std::span<float> out,
                    std::vector<float>& scratch, std::vector<float>& att_scratch) const;

  GridDims dims_;
  double voxel_size_mm_;
  std::vector<double> angles_;
  std::vector<float> mu_;
  std::vector<RotationTable> rotations_;
  std::vector<std::vector<double>> depth_kernels_;  // index = depth plane y
  bool psf_delta_ = true;
  std::vector<float> att_cache_;
};

/// Single-shot wrappers over Projector using every view of `geom`.
ProjectionSet forward_project(const Volume3D& activity, const Volume3D& mu, const GeometryConfig& geom,
                              const PsfModel& psf);
Volume3D back_project(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom,
                      const PsfModel& psf);

/// Throws ValidationError unless `geom` matches the grid of `volume`.
void check_geometry_matches(const GeometryConfig& geom, const Volume3D& volume);

}  // namespace spectsim
