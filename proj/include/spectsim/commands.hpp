#pragma once

// Stage-level entry points behind the command-line tool. Each validates all
// of its inputs before writing any output file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spectsim/io.hpp"
#include "spectsim/pipeline.hpp"

namespace spectsim::commands {

struct PhantomArgs {
  std::optional<fs::path> spec_path;  // default torso when absent
  fs::path out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the spec seed
};
/// Writes out_dir/{spec.json, activity.vol.*, mu.vol.*}.
void phantom(const PhantomArgs& args);

struct SimulateArgs {
  fs::path activity;
  fs::path mu;
  fs::path out_dir = ".";
  std::size_t n_views = 120;
  double arc_deg = 180.0;
  double start_deg = -45.0;
  PsfModel psf;
  double total_counts = 8.0e6;
  double dose_scale = kHighNoiseDoseScale;
  std::uint64_t seed = 0;
};
/// Writes out_dir/{expected, low, high}.proj.*; `high` uses args.dose_scale.
void simulate(const SimulateArgs& args);

struct ReconArgs {
  fs::path proj;
  fs::path mu;
  fs::path out;
  OsemConfig osem;
  std::optional<PsfModel> psf;  // else taken from the projection header, else defaults
};
void recon(const ReconArgs& args);

struct MetricsArgs {
  fs::path volume;
  std::optional<fs::path> roi_path;
  std::optional<fs::path> spec_path;
  std::optional<std::size_t> slice;
  std::optional<fs::path> reference;
  std::optional<fs::path> output;
};
/// Returns the report; also written to args.output when given.
Json metrics(const MetricsArgs& args);

struct ExportArgs {
  std::vector<fs::path> high;
  std::vector<fs::path> low;
  std::vector<std::string> ids;
  std::vector<std::string> test_ids;
  fs::path out_dir = ".";
};
DatasetManifest export_dataset(const ExportArgs& args);

}  // namespace spectsim::commands
