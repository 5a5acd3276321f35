#include "spectsim/noise.hpp"

#include <array>
#include <cmath>

#include "spectsim/errors.hpp"

namespace spectsim {

void NoiseConfig::validate() const {
  require(std::isfinite(target_total_counts) && target_total_counts > 0.0, "target_total_counts must be > 0");
  require(std::isfinite(dose_scale) && dose_scale > 0.0 && dose_scale <= 1.0, "dose_scale must be in (0, 1]");
}

ProjectionSet scale_to_total_counts(const ProjectionSet& proj, double target_total) {
  require(proj.kind == CountKind::expected_counts, "only expected counts can be calibrated");
  require(std::isfinite(target_total) && target_total > 0.0, "target total counts must be > 0");
  const double total = proj.sum();
  require(total > 0.0, "cannot calibrate all-zero projections");
  ProjectionSet out = proj;
  const double factor = target_total / total;
  for (float& v : out.data) {
    v = static_cast<float>(static_cast<double>(v) * factor);
  }
  return out;
}

namespace {

double log_factorial(std::uint64_t k) {
  static const std::array<double, 128> table = [] {
    std::array<double, 128> t{};
    for (std::size_t i = 1; i < t.size(); ++i) {
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    }
    return t;
  }();
  if (k < table.size()) {
    return table[k];
  }
  // Stirling series; error below 1e-15 for k >= 128.
  const double x = static_cast<double>(k) + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x - 0.5) * std::log(x) - x + 0.91893853320467274178 +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

std::uint64_t poisson_inversion(double lambda, PhiloxStream& rng) {
  const double u = rng.uniform_open();
  double p = std::exp(-lambda);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::uint64_t poisson_ptrs(double lambda, PhiloxStream& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform_open() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::uint64_t>(kf);
    }
    if (kf < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const auto k = static_cast<std::uint64_t>(kf);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + kf * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace

std::uint64_t sample_poisson(double lambda, PhiloxStream& rng) {
  if (lambda <= 0.0) {
    return 0;
  }
  return lambda < 10.0 ? poisson_inversion(lambda, rng) : poisson_ptrs(lambda, rng);
}

ProjectionSet apply_poisson(const ProjectionSet& proj, const NoiseConfig& cfg) {
  require(proj.kind == CountKind::expected_counts, "Poisson sampling needs expected counts");
  require(std::isfinite(cfg.dose_scale) && cfg.dose_scale > 0.0 && cfg.dose_scale <= 1.0,
          "dose_scale must be in (0, 1]");
  for (float v : proj.data) {
    require(std::isfinite(v) && v >= 0.0F, "expected counts must be finite and >= 0");
  }
  ProjectionSet out = proj;
  out.kind = CountKind::sampled_counts;
  const auto n = static_cast<std::ptrdiff_t>(proj.data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double lambda = cfg.dose_scale * static_cast<double>(proj.data[static_cast<std::size_t>(i)]);
    PhiloxStream rng(cfg.seed, static_cast<std::uint64_t>(i));
    out.data[static_cast<std::size_t>(i)] = static_cast<float>(sample_poisson(lambda, rng));
  }
  return out;
}

}  // namespace spectsim
