#pragma once

#include <cstdint>

#include "spectsim/philox.hpp"
#include "spectsim/projection.hpp"

namespace spectsim {

struct NoiseConfig {
  double target_total_counts = 8.0e6;  // low-noise calibration
  double dose_scale = 1.0;             // 1.0 low noise, 0.125 high noise
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr double kLowDoseScale = 1.0;
inline constexpr double kHighNoiseDoseScale = 0.125;

/// Rescales expected counts so that they sum to `target_total`.
ProjectionSet scale_to_total_counts(const ProjectionSet& proj, double target_total);

/// Independent Poisson draw per bin with mean dose_scale * expected. Bin
/// (view, row, bin) always uses Philox stream (seed, flat index), so the
/// output does not depend on thread count or evaluation order.
ProjectionSet apply_poisson(const ProjectionSet& proj, const NoiseConfig& cfg);

/// Poisson variate: inversion below lambda = 10, PTRS transformed rejection
/// (Hormann 1993) at and above.
std::uint64_t sample_poisson(double lambda, PhiloxStream& rng);

}  // namespace spectsim
