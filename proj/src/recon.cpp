#include "spectsim/recon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spectsim/errors.hpp"

namespace spectsim {

void OsemConfig::validate() const {
  require(n_iterations >= 1, "osem n_iterations must be >= 1");
  require(n_subsets >= 1, "osem n_subsets must be >= 1");
  require(std::isfinite(epsilon) && epsilon > 0.0, "osem epsilon must be > 0");
  require(std::isfinite(initial_value) && initial_value > 0.0, "osem initial_value must be > 0");
}

std::vector<std::vector<std::size_t>> partition_subsets(std::size_t n_views, std::size_t n_subsets) {
  require(n_subsets >= 1, "number of subsets must be >= 1");
  require(n_views % n_subsets == 0, "number of subsets (" + std::to_string(n_subsets) +
                                        ") must divide the number of views (" + std::to_string(n_views) + ")");
  std::vector<std::vector<std::size_t>> subsets(n_subsets);
  for (std::size_t k = 0; k < n_subsets; ++k) {
    for (std::size_t v = k; v < n_views; v += n_subsets) {
      subsets[k].push_back(v);
    }
  }
  return subsets;
}

std::vector<float> subset_sensitivity(const EmSystem& system, std::span<const std::size_t> subset) {
  std::vector<float> ones(system.n_views() * system.view_size(), 1.0F);
  std::vector<float> sens(system.image_size());
  system.back(ones, subset, sens);
  return sens;
}

std::vector<float> osem_solve(const EmSystem& system, std::span<const float> measurements, const OsemConfig& cfg,
                              const OsemObserver& observer) {
  cfg.validate();
  const std::size_t vsize = system.view_size();
  require(measurements.size() == system.n_views() * vsize, "measurement size does not match the system");
  const auto subsets = partition_subsets(system.n_views(), cfg.n_subsets);

  std::vector<std::vector<float>> sensitivities;
  sensitivities.reserve(subsets.size());
  for (const auto& subset : subsets) {
    sensitivities.push_back(subset_sensitivity(system, subset));
  }

  const std::size_t n = system.image_size();
  const double eps = cfg.epsilon;
  std::vector<float> image(n, static_cast<float>(cfg.initial_value));
  std::vector<float> estimate(measurements.size(), 0.0F);
  std::vector<float> ratio(measurements.size(), 0.0F);
  std::vector<float> correction(n);

  for (std::size_t it = 0; it < cfg.n_iterations; ++it) {
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      const auto& views = subsets[s];
      system.forward(image, views, estimate);
      for (std::size_t v : views) {
        const std::size_t begin = v * vsize;
        for (std::size_t i = begin; i < begin + vsize; ++i) {
          const double q = std::max(static_cast<double>(estimate[i]), eps);
          ratio[i] = static_cast<float>(static_cast<double>(measurements[i]) / q);
        }
      }
      system.back(ratio, views, correction);
      const auto& sens = sensitivities[s];
      for (std::size_t j = 0; j < n; ++j) {
        const double sj = sens[j];
        if (sj < eps) {
          image[j] = 0.0F;
          continue;
        }
        const double updated = static_cast<double>(image[j]) * static_cast<double>(correction[j]) / std::max(sj, eps);
        image[j] = static_cast<float>(std::max(updated, 0.0));
      }
      if (observer) {
        observer(it, s, image);
      }
    }
  }
  return image;
}

namespace {
void check_recon_inputs(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom) {
  check_geometry_matches(geom, mu);
  require(proj.n_views == geom.n_views && proj.n_rows == geom.n_rows && proj.n_bins == geom.n_bins,
          "projection dims (" + std::to_string(proj.n_views) + "x" + std::to_string(proj.n_rows) + "x" +
              std::to_string(proj.n_bins) + ") do not match the geometry");
  proj.validate();
}
}  // namespace

Volume3D compute_subset_sensitivity(const GeometryConfig& geom, const Volume3D& mu, const PsfModel& psf,
                                    std::span<const std::size_t> subset, const OsemConfig& cfg) {
  check_geometry_matches(geom, mu);
  const Projector projector(mu, geom.angles_deg(), cfg.model_psf_in_recon ? psf : PsfModel::none());
  const ProjectorSystem system(projector);
  return {mu.dims(), mu.voxel_size_mm(), subset_sensitivity(system, subset)};
}

Volume3D osem_with(const Projector& projector, const ProjectionSet& proj, const OsemConfig& cfg,
                   const OsemObserver& observer) {
  require(proj.n_views == projector.n_views() && proj.view_size() == projector.view_size(),
          "projection dims do not match the projector");
  const ProjectorSystem system(projector);
  return {projector.dims(), projector.voxel_size_mm(), osem_solve(system, proj.data, cfg, observer)};
}

Volume3D osem(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom, const PsfModel& psf,
              const OsemConfig& cfg, const OsemObserver& observer) {
  cfg.validate();
  check_recon_inputs(proj, mu, geom);
  partition_subsets(proj.n_views, cfg.n_subsets);
  const Projector projector(mu, proj.angles_deg, cfg.model_psf_in_recon ? psf : PsfModel::none());
  return osem_with(projector, proj, cfg, observer);
}

Volume3D mlem(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom, const PsfModel& psf,
              const OsemConfig& cfg, const OsemObserver& observer) {
  OsemConfig single = cfg;
  single.n_subsets = 1;
  return osem(proj, mu, geom, psf, single, observer);
}

double poisson_log_likelihood(std::span<const float> measured, std::span<const float> expected) {
  require(measured.size() == expected.size(), "likelihood inputs differ in size");
  double ll = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double q = expected[i];
    const double y = measured[i];
    if (y > 0.0) {
      ll += y * std::log(std::max(q, 1e-300));
    }
    ll -= q;
  }
  return ll;
}

}  // namespace spectsim
