#include "spectsim/reference/serial_projector.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "spectsim/errors.hpp"

namespace spectsim::reference {

namespace {

struct Sample {
  std::ptrdiff_t x0, y0;
  double fx, fy;
};

Sample source_point(std::size_t n, double angle_deg, std::size_t y, std::size_t x) {
  const double a = normalize_angle_deg(angle_deg) * std::numbers::pi / 180.0;
  const double c = 0.5 * static_cast<double>(n - 1);
  const double u = static_cast<double>(x) - c;
  const double v = static_cast<double>(y) - c;
  const double sx = c + std::cos(a) * u - std::sin(a) * v;
  const double sy = c + std::sin(a) * u + std::cos(a) * v;
  const double x0 = std::floor(sx);
  const double y0 = std::floor(sy);
  return {static_cast<std::ptrdiff_t>(x0), static_cast<std::ptrdiff_t>(y0), sx - x0, sy - y0};
}

double bilinear(const Volume3D& vol, std::size_t z, const Sample& s) {
  const auto n = static_cast<std::ptrdiff_t>(vol.dims().nx);
  double out = 0.0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const std::ptrdiff_t xx = s.x0 + dx;
      const std::ptrdiff_t yy = s.y0 + dy;
      if (xx < 0 || yy < 0 || xx >= n || yy >= n) continue;
      const double w = (dx ? s.fx : 1.0 - s.fx) * (dy ? s.fy : 1.0 - s.fy);
      out += w * vol.at(z, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
    }
  }
  return out;
}

void splat(std::vector<double>& out, const GridDims& d, std::size_t z, const Sample& s, double value) {
  const auto n = static_cast<std::ptrdiff_t>(d.nx);
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const std::ptrdiff_t xx = s.x0 + dx;
      const std::ptrdiff_t yy = s.y0 + dy;
      if (xx < 0 || yy < 0 || xx >= n || yy >= n) continue;
      const double w = (dx ? s.fx : 1.0 - s.fx) * (dy ? s.fy : 1.0 - s.fy);
      out[(z * d.ny + static_cast<std::size_t>(yy)) * d.nx + static_cast<std::size_t>(xx)] += w * value;
    }
  }
}

std::vector<double> gaussian(double sigma_bins, double truncation) {
  if (!(sigma_bins > 0.0)) return {1.0};
  const auto h = static_cast<std::ptrdiff_t>(std::floor(truncation * sigma_bins + 1e-9));
  std::vector<double> k;
  double total = 0.0;
  for (std::ptrdiff_t i = -h; i <= h; ++i) {
    k.push_back(std::exp(-0.5 * static_cast<double>(i * i) / (sigma_bins * sigma_bins)));
    total += k.back();
  }
  for (double& w : k) w /= total;
  return k;
}

// Attenuation path weight of every rotated voxel for one view, [z][y][x].
std::vector<double> path_weights(const Volume3D& mu, double angle_deg) {
  const GridDims& d = mu.dims();
  const double dl = mu.voxel_size_cm();
  std::vector<double> rotated(d.voxel_count());
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x)
        rotated[(z * d.ny + y) * d.nx + x] = bilinear(mu, z, source_point(d.nx, angle_deg, y, x));
  std::vector<double> w(d.voxel_count());
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t x = 0; x < d.nx; ++x) {
      for (std::size_t y = 0; y < d.ny; ++y) {
        double path = 0.5 * rotated[(z * d.ny + y) * d.nx + x];
        for (std::size_t yy = y + 1; yy < d.ny; ++yy) path += rotated[(z * d.ny + yy) * d.nx + x];
        w[(z * d.ny + y) * d.nx + x] = dl * std::exp(-path * dl);
      }
    }
  }
  return w;
}

std::vector<double> kernel_for_depth(const Volume3D& mu, const PsfModel& psf, std::size_t y) {
  const double vs = mu.voxel_size_mm();
  const double depth_mm = (static_cast<double>(mu.dims().ny - y) - 0.5) * vs;
  return gaussian((psf.sigma0_mm + psf.sigma_slope * depth_mm) / vs, psf.truncation_sigmas);
}

}  // namespace

ProjectionSet forward_project(const Volume3D& activity, const Volume3D& mu, const GeometryConfig& geom,
                              const PsfModel& psf) {
  require(activity.same_geometry(mu), "activity and mu must share geometry");
  check_geometry_matches(geom, activity);
  const GridDims& d = activity.dims();
  const auto angles = geom.angles_deg();
  ProjectionSet out(geom.n_views, d.nz, d.nx, angles);
  const auto nz = static_cast<std::ptrdiff_t>(d.nz);
  const auto nx = static_cast<std::ptrdiff_t>(d.nx);

  for (std::size_t v = 0; v < angles.size(); ++v) {
    const auto w = path_weights(mu, angles[v]);
    std::vector<double> detector(d.nz * d.nx, 0.0);
    for (std::size_t y = 0; y < d.ny; ++y) {
      const auto k = kernel_for_depth(mu, psf, y);
      const auto h = static_cast<std::ptrdiff_t>(k.size() / 2);
      for (std::size_t z = 0; z < d.nz; ++z) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          const double value = bilinear(activity, z, source_point(d.nx, angles[v], y, x)) * w[(z * d.ny + y) * d.nx + x];
          if (value == 0.0) continue;
          for (std::ptrdiff_t a = -h; a <= h; ++a) {
            for (std::ptrdiff_t b = -h; b <= h; ++b) {
              const std::ptrdiff_t zz = static_cast<std::ptrdiff_t>(z) + a;
              const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x) + b;
              if (zz < 0 || xx < 0 || zz >= nz || xx >= nx) continue;
              detector[static_cast<std::size_t>(zz * nx + xx)] +=
                  k[static_cast<std::size_t>(a + h)] * k[static_cast<std::size_t>(b + h)] * value;
            }
          }
        }
      }
    }
    for (std::size_t i = 0; i < detector.size(); ++i) out.data[v * out.view_size() + i] = static_cast<float>(detector[i]);
  }
  return out;
}

Volume3D back_project(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom,
                      const PsfModel& psf) {
  check_geometry_matches(geom, mu);
  require(proj.n_views == geom.n_views && proj.n_rows == geom.n_rows && proj.n_bins == geom.n_bins,
          "projection dims do not match the geometry");
  const GridDims& d = mu.dims();
  const auto angles = geom.angles_deg();
  const auto nz = static_cast<std::ptrdiff_t>(d.nz);
  const auto nx = static_cast<std::ptrdiff_t>(d.nx);
  std::vector<double> accum(d.voxel_count(), 0.0);

  for (std::size_t v = 0; v < angles.size(); ++v) {
    const auto w = path_weights(mu, angles[v]);
    for (std::size_t y = 0; y < d.ny; ++y) {
      const auto k = kernel_for_depth(mu, psf, y);
      const auto h = static_cast<std::ptrdiff_t>(k.size() / 2);
      for (std::size_t z = 0; z < d.nz; ++z) {
        for (std::size_t x = 0; x < d.nx; ++x) {
          double gathered = 0.0;
          for (std::ptrdiff_t a = -h; a <= h; ++a) {
            for (std::ptrdiff_t b = -h; b <= h; ++b) {
              const std::ptrdiff_t zz = static_cast<std::ptrdiff_t>(z) + a;
              const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x) + b;
              if (zz < 0 || xx < 0 || zz >= nz || xx >= nx) continue;
              gathered += k[static_cast<std::size_t>(a + h)] * k[static_cast<std::size_t>(b + h)] *
                          proj.at(v, static_cast<std::size_t>(zz), static_cast<std::size_t>(xx));
            }
          }
          splat(accum, d, z, source_point(d.nx, angles[v], y, x), gathered * w[(z * d.ny + y) * d.nx + x]);
        }
      }
    }
  }
  std::vector<float> data(accum.begin(), accum.end());
  return {d, mu.voxel_size_mm(), std::move(data)};
}

}  // namespace spectsim::reference
