#include <cmath>
#include <numbers>

#include "spectsim/errors.hpp"
#include "spectsim/projector.hpp"

namespace spectsim {

double normalize_angle_deg(double angle_deg) {
  double a = std::fmod(angle_deg, 360.0);
  if (a < 0.0) {
    a += 360.0;
  }
  return a >= 360.0 ? 0.0 : a;
}

namespace {
// Exact cos/sin at the cardinal angles so that quarter turns are permutations.
std::pair<double, double> cos_sin_deg(double angle_deg) {
  if (angle_deg == 0.0) return {1.0, 0.0};
  if (angle_deg == 90.0) return {0.0, 1.0};
  if (angle_deg == 180.0) return {-1.0, 0.0};
  if (angle_deg == 270.0) return {0.0, -1.0};
  const double rad = angle_deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}
}  // namespace

RotationTable::RotationTable(std::size_t n, double angle_deg) : n_(n), taps_(n * n) {
  require(n > 0, "rotation plane must be non-empty");
  const auto [c, s] = cos_sin_deg(normalize_angle_deg(angle_deg));
  const double centre = 0.5 * static_cast<double>(n - 1);
  const auto ni = static_cast<std::ptrdiff_t>(n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double u = static_cast<double>(x) - centre;
      const double v = static_cast<double>(y) - centre;
      const double sx = centre + c * u - s * v;
      const double sy = centre + s * u + c * v;
      const double fx0 = std::floor(sx);
      const double fy0 = std::floor(sy);
      const double fx = sx - fx0;
      const double fy = sy - fy0;
      const auto x0 = static_cast<std::ptrdiff_t>(fx0);
      const auto y0 = static_cast<std::ptrdiff_t>(fy0);
      Taps& t = taps_[y * n + x];
      const std::ptrdiff_t xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const std::ptrdiff_t ys[4] = {y0, y0, y0 + 1, y0 + 1};
      const double ws[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
      for (int k = 0; k < 4; ++k) {
        const bool inside = xs[k] >= 0 && ys[k] >= 0 && xs[k] < ni && ys[k] < ni;
        t.idx[k] = inside ? static_cast<std::uint32_t>(ys[k] * ni + xs[k]) : 0U;
        t.w[k] = inside ? static_cast<float>(ws[k]) : 0.0F;
      }
    }
  }
}

void RotationTable::apply(std::span<const float> in, std::span<float> out) const {
  for (std::size_t o = 0; o < taps_.size(); ++o) {
    const Taps& t = taps_[o];
    out[o] = t.w[0] * in[t.idx[0]] + t.w[1] * in[t.idx[1]] + t.w[2] * in[t.idx[2]] + t.w[3] * in[t.idx[3]];
  }
}

void RotationTable::apply_adjoint_add(std::span<const float> in, std::span<float> out) const {
  for (std::size_t o = 0; o < taps_.size(); ++o) {
    const Taps& t = taps_[o];
    const float v = in[o];
    if (v == 0.0F) {
      continue;
    }
    for (int k = 0; k < 4; ++k) {
      out[t.idx[k]] += t.w[k] * v;
    }
  }
}

void RotationTable::apply_adjoint_add(std::span<const float> in, std::span<double> out) const {
  for (std::size_t o = 0; o < taps_.size(); ++o) {
    const Taps& t = taps_[o];
    const double v = in[o];
    if (v == 0.0) {
      continue;
    }
    for (int k = 0; k < 4; ++k) {
      out[t.idx[k]] += static_cast<double>(t.w[k]) * v;
    }
  }
}

std::vector<float> rotate_slice(std::span<const float> plane, std::size_t n, double angle_deg) {
  require(plane.size() == n * n, "rotate_slice expects a square n x n plane");
  std::vector<float> out(n * n);
  RotationTable(n, angle_deg).apply(plane, out);
  return out;
}

std::vector<float> rotate_slice_adjoint(std::span<const float> plane, std::size_t n, double angle_deg) {
  require(plane.size() == n * n, "rotate_slice_adjoint expects a square n x n plane");
  std::vector<float> out(n * n, 0.0F);
  RotationTable(n, angle_deg).apply_adjoint_add(plane, std::span<float>(out));
  return out;
}

}  // namespace spectsim
