#include <cmath>
#include <string>

#include "spectsim/errors.hpp"
#include "spectsim/projector.hpp"

namespace spectsim {

void PsfModel::validate() const {
  require(std::isfinite(sigma0_mm) && sigma0_mm >= 0.0, "psf sigma0_mm must be >= 0");
  require(std::isfinite(sigma_slope) && sigma_slope >= 0.0, "psf sigma_slope must be >= 0");
  require(std::isfinite(truncation_sigmas) && truncation_sigmas > 0.0, "psf truncation_sigmas must be > 0");
}

std::vector<double> psf_kernel(double distance_mm, const PsfModel& psf, double bin_size_mm) {
  require(distance_mm >= 0.0, "psf distance must be >= 0");
  require(bin_size_mm > 0.0, "bin size must be > 0");
  const double sigma = psf.sigma_mm(distance_mm) / bin_size_mm;
  if (!(sigma > 0.0)) {
    return {1.0};
  }
  // Small slack so that e.g. 3 * (1.0 - 1e-16) still keeps the third tap.
  const auto half = static_cast<std::ptrdiff_t>(std::floor(psf.truncation_sigmas * sigma + 1e-9));
  if (half == 0) {
    return {1.0};
  }
  std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double kd = static_cast<double>(k);
    const double w = std::exp(-0.5 * kd * kd / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + half)] = w;
    total += w;
  }
  for (double& w : kernel) {
    w /= total;
  }
  return kernel;
}

}  // namespace spectsim
