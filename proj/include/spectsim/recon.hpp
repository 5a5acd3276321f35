#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "spectsim/projection.hpp"
#include "spectsim/projector.hpp"
#include "spectsim/volume.hpp"

namespace spectsim {

struct OsemConfig {
  std::size_t n_iterations = 5;
  std::size_t n_subsets = 6;
  double epsilon = 1e-10;
  bool model_psf_in_recon = false;
  double initial_value = 1.0;

  void validate() const;
};

/// Interleaved subsets: subset k = {k, k + n_subsets, k + 2 n_subsets, ...}.
std::vector<std::vector<std::size_t>> partition_subsets(std::size_t n_views, std::size_t n_subsets);

/// Linear system seen by the EM solvers: an image of image_size() values and
/// n_views() groups of view_size() measurements each.
class EmSystem {
public:
  virtual ~EmSystem() = default;
  [[nodiscard]] virtual std::size_t image_size() const = 0;
  [[nodiscard]] virtual std::size_t n_views() const = 0;
  [[nodiscard]] virtual std::size_t view_size() const = 0;
  /// Writes the listed views of `y`; other views are left as they are.
  virtual void forward(std::span<const float> x, std::span<const std::size_t> views, std::span<float> y) const = 0;
  /// Overwrites `x` with the back projection of the listed views of `y`.
  virtual void back(std::span<const float> y, std::span<const std::size_t> views, std::span<float> x) const = 0;
};

/// EmSystem backed by the rotation projector.
class ProjectorSystem final : public EmSystem {
public:
  explicit ProjectorSystem(const Projector& projector) : projector_(projector) {}
  [[nodiscard]] std::size_t image_size() const override { return projector_.dims().voxel_count(); }
  [[nodiscard]] std::size_t n_views() const override { return projector_.n_views(); }
  [[nodiscard]] std::size_t view_size() const override { return projector_.view_size(); }
  void forward(std::span<const float> x, std::span<const std::size_t> views, std::span<float> y) const override {
    projector_.forward(x, views, y);
  }
  void back(std::span<const float> y, std::span<const std::size_t> views, std::span<float> x) const override {
    projector_.back(y, views, x);
  }

private:
  const Projector& projector_;
};

/// Called after every subset update with (iteration, subset, current image).
using OsemObserver = std::function<void(std::size_t, std::size_t, std::span<const float>)>;

/// Sensitivity s = A_S^T 1 over the views of one subset.
std::vector<float> subset_sensitivity(const EmSystem& system, std::span<const std::size_t> subset);

/// OS-EM on an arbitrary system. Each subset update is
///   x <- x * A_S^T(y_S / max(A_S x, eps)) / max(s_S, eps),
/// with voxels whose subset sensitivity is below eps held at zero.
std::vector<float> osem_solve(const EmSystem& system, std::span<const float> measurements, const OsemConfig& cfg,
                              const OsemObserver& observer = {});

Volume3D compute_subset_sensitivity(const GeometryConfig& geom, const Volume3D& mu, const PsfModel& psf,
                                    std::span<const std::size_t> subset, const OsemConfig& cfg);

/// Attenuation-corrected OS-EM. The view angles come from `proj`; `geom`
/// only has to agree with its dimensions. PSF is modelled iff
/// cfg.model_psf_in_recon.
Volume3D osem(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom, const PsfModel& psf,
              const OsemConfig& cfg, const OsemObserver& observer = {});

/// OS-EM with a single subset.
Volume3D mlem(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom, const PsfModel& psf,
              const OsemConfig& cfg, const OsemObserver& observer = {});

/// Same as osem() but reuses an existing projector, e.g. to reconstruct
/// several data sets with one attenuation map.
Volume3D osem_with(const Projector& projector, const ProjectionSet& proj, const OsemConfig& cfg,
                   const OsemObserver& observer = {});

/// Poisson log-likelihood sum_i (y_i log(q_i) - q_i), dropping the constant log(y_i!).
double poisson_log_likelihood(std::span<const float> measured, std::span<const float> expected);

}  // namespace spectsim
