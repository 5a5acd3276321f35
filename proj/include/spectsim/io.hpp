#pragma once

// On-disk formats shared with the denoiser:
//   <stem>.vol.json  + <stem>.vol.raw    Volume3D, f32 little-endian, [z][y][x]
//   <stem>.proj.json + <stem>.proj.raw   ProjectionSet, f32 little-endian, [view][row][bin]
//   manifest.json                        paired slice dataset
// All headers carry "format_version": 1. See docs/file_formats.md.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "spectsim/metrics.hpp"
#include "spectsim/noise.hpp"
#include "spectsim/phantom.hpp"
#include "spectsim/projection.hpp"
#include "spectsim/projector.hpp"
#include "spectsim/recon.hpp"
#include "spectsim/volume.hpp"

namespace spectsim {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

struct FilePaths {
  fs::path header;
  fs::path raw;
};

/// Accepts "<stem>", "<stem>.vol.json" or "<stem>.vol.raw" (likewise ".proj").
FilePaths volume_paths(const fs::path& path);
FilePaths projection_paths(const fs::path& path);

/// Returns the header path. `metadata` is stored verbatim under "metadata".
fs::path write_volume(const Volume3D& volume, const fs::path& path, const Json& metadata = Json::object());
Volume3D read_volume(const fs::path& path);
Json read_volume_header(const fs::path& path);

fs::path write_projections(const ProjectionSet& proj, const fs::path& path, const Json& metadata = Json::object());
ProjectionSet read_projections(const fs::path& path);
Json read_projection_header(const fs::path& path);

enum class Split { train, test };
std::string to_string(Split split);

struct DatasetPair {
  std::string patient_id;
  std::size_t slice_index = 0;
  std::string high_path;  // relative to the manifest directory
  std::string low_path;
  Split split = Split::train;
  double norm_scale = 1.0;

  friend bool operator==(const DatasetPair&, const DatasetPair&) = default;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  std::vector<DatasetPair> pairs;

  [[nodiscard]] std::size_t count(Split split) const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

fs::path write_manifest(const DatasetManifest& manifest, const fs::path& path);
/// With `verify_files`, every referenced slice header and raw payload must
/// exist and agree in size.
DatasetManifest read_manifest(const fs::path& path, bool verify_files = true);

/// Writes every axial slice of each patient as a single-slice volume under
/// out_dir/slices/<id>/ and returns (and writes) out_dir/manifest.json.
/// norm_scale is the maximum of the patient's low-noise volume.
DatasetManifest export_slice_pairs(const std::vector<Volume3D>& high, const std::vector<Volume3D>& low,
                                   const std::vector<std::string>& ids, const fs::path& out_dir,
                                   const std::vector<std::string>& test_ids);

Json read_json_file(const fs::path& path);
void write_json_file(const Json& json, const fs::path& path);

// JSON schemas. Missing keys take the type's defaults.
void to_json(Json& j, const GridDims& d);
void from_json(const Json& j, GridDims& d);
void to_json(Json& j, const OrganSpec& o);
void from_json(const Json& j, OrganSpec& o);
void to_json(Json& j, const PhantomSpec& s);
/// Missing "organs" falls back to the torso template.
void from_json(const Json& j, PhantomSpec& s);
void to_json(Json& j, const GeometryConfig& g);
void from_json(const Json& j, GeometryConfig& g);
void to_json(Json& j, const PsfModel& p);
void from_json(const Json& j, PsfModel& p);
void to_json(Json& j, const NoiseConfig& n);
void from_json(const Json& j, NoiseConfig& n);
void to_json(Json& j, const OsemConfig& c);
void from_json(const Json& j, OsemConfig& c);
void to_json(Json& j, const MetricReport& r);
void to_json(Json& j, const RoiMask& r);
void from_json(const Json& j, RoiMask& r);

}  // namespace spectsim
