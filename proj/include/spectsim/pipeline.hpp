#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spectsim/io.hpp"
#include "spectsim/metrics.hpp"
#include "spectsim/noise.hpp"
#include "spectsim/phantom.hpp"
#include "spectsim/projector.hpp"
#include "spectsim/recon.hpp"

namespace spectsim {

/// End-to-end protocol: population of phantoms, two dose levels, OS-EM,
/// paired slice export, and liver-ROI NSD on the held-out patient.
struct PipelineConfig {
  std::size_t n_patients = 10;
  std::size_t test_patient_index = 9;
  PhantomSpec phantom = default_torso_spec();
  GeometryConfig geometry;
  NoiseConfig noise;
  double high_noise_dose_scale = kHighNoiseDoseScale;
  OsemConfig osem;
  PsfModel psf;
  std::filesystem::path out_dir = "pipeline_out";
  std::uint64_t seed = 0;

  /// Checks every invariant before any file is written.
  void validate() const;
};

void to_json(Json& j, const PipelineConfig& c);
/// Geometry rows/bins/bin size default to the phantom grid when absent.
void from_json(const Json& j, PipelineConfig& c);

struct PatientResult {
  std::string id;
  double expected_total = 0.0;
  double low_counts = 0.0;
  double high_counts = 0.0;
};

struct PipelineSummary {
  std::size_t n_train_pairs = 0;
  std::size_t n_test_pairs = 0;
  std::string test_patient;
  RoiMask roi;
  MetricReport nsd_high;
  MetricReport nsd_low;
  std::vector<PatientResult> patients;

  [[nodiscard]] double nsd_ratio() const { return nsd_high.nsd / nsd_low.nsd; }
};

void to_json(Json& j, const PipelineSummary& s);

std::string patient_id(std::size_t index);

/// Runs the full protocol and writes out_dir/{config.json, summary.json,
/// patients/, dataset/}. Stage failures are rethrown with the stage name.
PipelineSummary run_pipeline(const PipelineConfig& cfg);

}  // namespace spectsim
