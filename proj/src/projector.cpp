#include "spectsim/projector.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spectsim/errors.hpp"

namespace spectsim {

std::vector<double> GeometryConfig::angles_deg() const {
  std::vector<double> angles(n_views);
  for (std::size_t k = 0; k < n_views; ++k) {
    angles[k] = start_deg + static_cast<double>(k) * arc_deg / static_cast<double>(n_views);
  }
  return angles;
}

void GeometryConfig::validate() const {
  require(n_views > 0, "geometry n_views must be > 0");
  require(std::isfinite(arc_deg) && arc_deg > 0.0, "geometry arc_deg must be > 0");
  require(std::isfinite(start_deg), "geometry start_deg must be finite");
  require(n_rows > 0 && n_bins > 0, "geometry n_rows and n_bins must be > 0");
  require(std::isfinite(bin_size_mm) && bin_size_mm > 0.0, "geometry bin_size_mm must be > 0");
}

GeometryConfig geometry_for(const Volume3D& volume, std::size_t n_views, double arc_deg, double start_deg) {
  GeometryConfig geom;
  geom.n_views = n_views;
  geom.arc_deg = arc_deg;
  geom.start_deg = start_deg;
  geom.n_rows = volume.dims().nz;
  geom.n_bins = volume.dims().nx;
  geom.bin_size_mm = volume.voxel_size_mm();
  return geom;
}

void check_geometry_matches(const GeometryConfig& geom, const Volume3D& volume) {
  geom.validate();
  const GridDims& d = volume.dims();
  require(d.nx == d.ny, "projector requires square axial slices (nx == ny)");
  require(geom.n_rows == d.nz, "geometry n_rows (" + std::to_string(geom.n_rows) + ") must equal nz (" +
                                   std::to_string(d.nz) + ")");
  require(geom.n_bins == d.nx, "geometry n_bins (" + std::to_string(geom.n_bins) + ") must equal nx (" +
                                   std::to_string(d.nx) + ")");
  require(std::abs(geom.bin_size_mm - volume.voxel_size_mm()) <= 1e-9 * volume.voxel_size_mm(),
          "geometry bin_size_mm must equal the voxel size");
}

Projector::Projector(const Volume3D& mu, std::vector<double> angles_deg, const PsfModel& psf)
    : Projector(mu, std::move(angles_deg), psf, Options{}) {}

Projector::Projector(const Volume3D& mu, std::vector<double> angles_deg, const PsfModel& psf, Options options)
    : dims_(mu.dims()),
      voxel_size_mm_(mu.voxel_size_mm()),
      angles_(std::move(angles_deg)),
      mu_(mu.data().begin(), mu.data().end()) {
  require(dims_.nx == dims_.ny, "projector requires square axial slices (nx == ny)");
  require(!angles_.empty(), "projector needs at least one view");
  require(mu.all_finite() && mu.all_nonnegative(), "attenuation map must be finite and >= 0");
  psf.validate();

  rotations_.reserve(angles_.size());
  for (double a : angles_) {
    require(std::isfinite(a), "view angles must be finite");
    rotations_.emplace_back(dims_.nx, a);
  }
  depth_kernels_.resize(dims_.ny);
  for (std::size_t y = 0; y < dims_.ny; ++y) {
    const double distance_mm = (static_cast<double>(dims_.ny - y) - 0.5) * voxel_size_mm_;
    depth_kernels_[y] = psf_kernel(distance_mm, psf, voxel_size_mm_);
    psf_delta_ = psf_delta_ && depth_kernels_[y].size() == 1;
  }

  const std::size_t per_view = dims_.voxel_count();
  if (per_view * angles_.size() * sizeof(float) <= options.attenuation_cache_bytes) {
    att_cache_.resize(per_view * angles_.size());
    const auto nv = static_cast<std::ptrdiff_t>(angles_.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t v = 0; v < nv; ++v) {
      const auto view = static_cast<std::size_t>(v);
      attenuation_for_view(view, std::span<float>(att_cache_).subspan(view * per_view, per_view));
    }
  }
}

std::vector<std::size_t> Projector::all_views() const {
  std::vector<std::size_t> views(n_views());
  std::iota(views.begin(), views.end(), std::size_t{0});
  return views;
}

// Path-length weight dl * exp(-sum of downstream mu * dl) in the rotated frame,
// counting half of the emitting voxel's own attenuation.
void Projector::attenuation_for_view(std::size_t view, std::span<float> att) const {
  const std::size_t nx = dims_.nx;
  const std::size_t ny = dims_.ny;
  const std::size_t plane = dims_.slice_size();
  const double dl = voxel_size_mm_ / 10.0;
  std::vector<float> rotated(plane);
  std::vector<double> acc(nx);
  for (std::size_t z = 0; z < dims_.nz; ++z) {
    rotations_[view].apply(std::span<const float>(mu_).subspan(z * plane, plane), rotated);
    std::fill(acc.begin(), acc.end(), 0.0);
    float* out = att.data() + z * plane;
    for (std::size_t yy = ny; yy-- > 0;) {
      const float* m = rotated.data() + yy * nx;
      float* w = out + yy * nx;
      for (std::size_t x = 0; x < nx; ++x) {
        const double path = acc[x] + 0.5 * static_cast<double>(m[x]);
        w[x] = static_cast<float>(path == 0.0 ? dl : dl * std::exp(-path * dl));
        acc[x] += static_cast<double>(m[x]);
      }
    }
  }
}

std::span<const float> Projector::cached_attenuation(std::size_t view) const {
  const std::size_t per_view = dims_.voxel_count();
  return std::span<const float>(att_cache_).subspan(view * per_view, per_view);
}

namespace {

// Zero-padded 1-D convolution along a strided line.
inline void convolve_line(const float* in, double* out, std::size_t n, std::size_t stride,
                          const std::vector<double>& kernel) {
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto len = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-half, -i);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(half, len - 1 - i);
    double s = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      s += kernel[static_cast<std::size_t>(k + half)] * static_cast<double>(in[(i + k) * static_cast<std::ptrdiff_t>(stride)]);
    }
    out[static_cast<std::size_t>(i) * stride] = s;
  }
}

inline void convolve_line(const double* in, double* out, std::size_t n, std::size_t stride,
                          const std::vector<double>& kernel) {
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto len = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-half, -i);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(half, len - 1 - i);
    double s = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      s += kernel[static_cast<std::size_t>(k + half)] * in[(i + k) * static_cast<std::ptrdiff_t>(stride)];
    }
    out[static_cast<std::size_t>(i) * stride] = s;
  }
}

}  // namespace

void Projector::forward_view(std::span<const float> activity, std::size_t view, std::span<float> out,
                             std::vector<float>& scratch, std::vector<float>& att_scratch) const {
  const std::size_t nx = dims_.nx;
  const std::size_t ny = dims_.ny;
  const std::size_t nz = dims_.nz;
  const std::size_t plane = dims_.slice_size();

  std::span<const float> att;
  if (attenuation_cached()) {
    att = cached_attenuation(view);
  } else {
    att_scratch.resize(dims_.voxel_count());
    attenuation_for_view(view, att_scratch);
    att = att_scratch;
  }

  // Weighted, rotated activity for every slice: scratch[z][y][x].
  scratch.resize(dims_.voxel_count());
  for (std::size_t z = 0; z < nz; ++z) {
    std::span<float> rotated(scratch.data() + z * plane, plane);
    rotations_[view].apply(activity.subspan(z * plane, plane), rotated);
    const float* w = att.data() + z * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      rotated[i] *= w[i];
    }
  }

  if (psf_delta_) {
    std::vector<double> row(nx);
    for (std::size_t z = 0; z < nz; ++z) {
      std::fill(row.begin(), row.end(), 0.0);
      const float* slab = scratch.data() + z * plane;
      for (std::size_t y = 0; y < ny; ++y) {
        const float* line = slab + y * nx;
        for (std::size_t x = 0; x < nx; ++x) {
          row[x] += static_cast<double>(line[x]);
        }
      }
      for (std::size_t x = 0; x < nx; ++x) {
        out[z * nx + x] = static_cast<float>(row[x]);
      }
    }
    return;
  }

  // Per depth plane: blur along bins, then along rows, and accumulate.
  std::vector<double> detector(nz * nx, 0.0);
  std::vector<double> blurred_x(nz * nx);
  std::vector<double> blurred(nz * nx);
  for (std::size_t y = 0; y < ny; ++y) {
    const auto& kernel = depth_kernels_[y];
    for (std::size_t z = 0; z < nz; ++z) {
      convolve_line(scratch.data() + z * plane + y * nx, blurred_x.data() + z * nx, nx, 1, kernel);
    }
    for (std::size_t x = 0; x < nx; ++x) {
      convolve_line(blurred_x.data() + x, blurred.data() + x, nz, nx, kernel);
    }
    for (std::size_t i = 0; i < detector.size(); ++i) {
      detector[i] += blurred[i];
    }
  }
  std::transform(detector.begin(), detector.end(), out.begin(), [](double v) { return static_cast<float>(v); });
}

void Projector::forward(std::span<const float> activity, std::span<const std::size_t> views,
                        std::span<float> out) const {
  require(activity.size() == dims_.voxel_count(), "activity size does not match the projector grid");
  require(out.size() == n_views() * view_size(), "projection buffer size does not match the projector");
  for (std::size_t v : views) {
    require(v < n_views(), "view index out of range");
  }
  const auto count = static_cast<std::ptrdiff_t>(views.size());
  const std::size_t vsize = view_size();
#pragma omp parallel
  {
    std::vector<float> scratch;
    std::vector<float> att_scratch;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const std::size_t v = views[static_cast<std::size_t>(i)];
      forward_view(activity, v, out.subspan(v * vsize, vsize), scratch, att_scratch);
    }
  }
}

void Projector::back(std::span<const float> proj, std::span<const std::size_t> views, std::span<float> out) const {
  require(proj.size() == n_views() * view_size(), "projection buffer size does not match the projector");
  require(out.size() == dims_.voxel_count(), "output size does not match the projector grid");
  for (std::size_t v : views) {
    require(v < n_views(), "view index out of range");
  }
  const std::size_t nx = dims_.nx;
  const std::size_t ny = dims_.ny;
  const std::size_t nz = dims_.nz;
  const std::size_t plane = dims_.slice_size();
  const auto nzi = static_cast<std::ptrdiff_t>(nz);
  const auto nyi = static_cast<std::ptrdiff_t>(ny);

  std::vector<double> accum(dims_.voxel_count(), 0.0);
  std::vector<float> att_scratch;
  std::vector<float> spread;  // transposed PSF, [z][y][x]
  if (!psf_delta_) {
    spread.resize(dims_.voxel_count());
  }
  if (!attenuation_cached()) {
    att_scratch.resize(dims_.voxel_count());
  }

  for (std::size_t v : views) {
    const std::span<const float> p = proj.subspan(v * view_size(), view_size());
    std::span<const float> att;
    if (attenuation_cached()) {
      att = cached_attenuation(v);
    } else {
      attenuation_for_view(v, att_scratch);
      att = att_scratch;
    }

    if (!psf_delta_) {
#pragma omp parallel
      {
        std::vector<double> blurred_z(nz * nx);
        std::vector<double> blurred(nx);
#pragma omp for schedule(static)
        for (std::ptrdiff_t yi = 0; yi < nyi; ++yi) {
          const auto y = static_cast<std::size_t>(yi);
          const auto& kernel = depth_kernels_[y];
          for (std::size_t x = 0; x < nx; ++x) {
            convolve_line(p.data() + x, blurred_z.data() + x, nz, nx, kernel);
          }
          for (std::size_t z = 0; z < nz; ++z) {
            convolve_line(blurred_z.data() + z * nx, blurred.data(), nx, 1, kernel);
            float* dst = spread.data() + z * plane + y * nx;
            for (std::size_t x = 0; x < nx; ++x) {
              dst[x] = static_cast<float>(blurred[x]);
            }
          }
        }
      }
    }

#pragma omp parallel
    {
      std::vector<float> weighted(plane);
#pragma omp for schedule(static)
      for (std::ptrdiff_t zi = 0; zi < nzi; ++zi) {
        const auto z = static_cast<std::size_t>(zi);
        const float* w = att.data() + z * plane;
        if (psf_delta_) {
          const float* row = p.data() + z * nx;
          for (std::size_t y = 0; y < ny; ++y) {
            for (std::size_t x = 0; x < nx; ++x) {
              weighted[y * nx + x] = row[x] * w[y * nx + x];
            }
          }
        } else {
          const float* src = spread.data() + z * plane;
          for (std::size_t i = 0; i < plane; ++i) {
            weighted[i] = src[i] * w[i];
          }
        }
        rotations_[v].apply_adjoint_add(weighted, std::span<double>(accum).subspan(z * plane, plane));
      }
    }
  }
  std::transform(accum.begin(), accum.end(), out.begin(), [](double v) { return static_cast<float>(v); });
}

ProjectionSet forward_project(const Volume3D& activity, const Volume3D& mu, const GeometryConfig& geom,
                              const PsfModel& psf) {
  require(activity.same_geometry(mu), "activity and attenuation volumes must share dims and voxel size");
  check_geometry_matches(geom, activity);
  require(activity.all_finite(), "activity volume contains non-finite values");
  require(mu.all_finite(), "attenuation volume contains non-finite values");
  const Projector projector(mu, geom.angles_deg(), psf);
  ProjectionSet out(geom.n_views, geom.n_rows, geom.n_bins, geom.angles_deg(), CountKind::expected_counts);
  const auto views = projector.all_views();
  projector.forward(activity.data(), views, out.data);
  return out;
}

Volume3D back_project(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom,
                      const PsfModel& psf) {
  check_geometry_matches(geom, mu);
  require(proj.n_views == geom.n_views && proj.n_rows == geom.n_rows && proj.n_bins == geom.n_bins,
          "projection dims do not match the geometry");
  require(proj.data.size() == proj.n_views * proj.view_size(), "projection data length does not match dims");
  const Projector projector(mu, geom.angles_deg(), psf);
  Volume3D out(mu.dims(), mu.voxel_size_mm());
  const auto views = projector.all_views();
  projector.back(proj.data, views, out.data());
  return out;
}

}  // namespace spectsim
