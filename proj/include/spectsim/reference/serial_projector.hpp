#pragma once

// Plain single-threaded projector written directly from the model
// definition: per-voxel bilinear sampling, column-wise attenuation and a
// direct (non-separable) 2-D PSF convolution. Slow; used to cross-check the
// OpenMP kernels and as the benchmark baseline.

#include "spectsim/projection.hpp"
#include "spectsim/projector.hpp"
#include "spectsim/volume.hpp"

namespace spectsim::reference {

ProjectionSet forward_project(const Volume3D& activity, const Volume3D& mu, const GeometryConfig& geom,
                              const PsfModel& psf);

Volume3D back_project(const ProjectionSet& proj, const Volume3D& mu, const GeometryConfig& geom,
                      const PsfModel& psf);

}  // namespace spectsim::reference
