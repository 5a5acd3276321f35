#include "spectsim/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "spectsim/errors.hpp"

namespace spectsim {

namespace {

constexpr const char* kDtype = "f32le";
constexpr const char* kVolumeOrder = "[z][y][x]";
constexpr const char* kProjectionOrder = "[view][row][bin]";

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

FilePaths paths_for(const fs::path& path, const std::string& tag) {
  std::string s = path.string();
  for (const std::string& suffix : {tag + ".json", tag + ".raw"}) {
    if (ends_with(s, suffix)) {
      s.resize(s.size() - suffix.size());
      break;
    }
  }
  return {fs::path(s + tag + ".json"), fs::path(s + tag + ".raw")};
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFU) << 24) | ((v & 0xFF00U) << 8) | ((v >> 8) & 0xFF00U) | (v >> 24);
  }
  return v;
}

void write_raw_f32(const fs::path& path, std::span<const float> values) {
  std::vector<std::uint32_t> words(values.size());
  std::transform(values.begin(), values.end(), words.begin(),
                 [](float v) { return to_little_endian(std::bit_cast<std::uint32_t>(v)); });
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(words.data()), static_cast<std::streamsize>(words.size() * 4));
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

std::vector<float> read_raw_f32(const fs::path& path, std::size_t expected_count) {
  if (!fs::exists(path)) {
    throw ValidationError("missing raw payload " + path.string());
  }
  const auto bytes = fs::file_size(path);
  if (bytes != expected_count * 4) {
    throw CorruptFileError(path.string() + ": expected " + std::to_string(expected_count * 4) + " bytes, found " +
                           std::to_string(bytes));
  }
  std::vector<std::uint32_t> words(expected_count);
  std::ifstream in(path, std::ios::binary);
  in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(bytes));
  if (!in) {
    throw CorruptFileError("failed reading " + path.string());
  }
  std::vector<float> values(expected_count);
  std::transform(words.begin(), words.end(), values.begin(),
                 [](std::uint32_t w) { return std::bit_cast<float>(to_little_endian(w)); });
  return values;
}

void check_header(const Json& header, const fs::path& path, const char* order) {
  if (!header.is_object()) {
    throw CorruptFileError(path.string() + ": header is not a JSON object");
  }
  const int version = header.value("format_version", -1);
  if (version != kFormatVersion) {
    throw CorruptFileError(path.string() + ": unsupported format_version " + std::to_string(version));
  }
  if (header.value("dtype", std::string{}) != kDtype) {
    throw CorruptFileError(path.string() + ": unsupported dtype");
  }
  if (header.value("order", std::string{}) != order) {
    throw CorruptFileError(path.string() + ": unexpected element order");
  }
}

template <typename T>
T field(const Json& header, const char* key, const fs::path& path) {
  if (!header.contains(key)) {
    throw CorruptFileError(path.string() + ": missing field '" + key + "'");
  }
  try {
    return header.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw CorruptFileError(path.string() + ": bad field '" + key + "': " + e.what());
  }
}

fs::path raw_path_from_header(const Json& header, const FilePaths& paths) {
  const std::string name = header.value("raw_file", paths.raw.filename().string());
  return paths.header.parent_path() / name;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
}

std::string generic(const fs::path& p) { return p.generic_string(); }

}  // namespace

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

void write_json_file(const Json& json, const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out << json.dump(2) << '\n';
}

FilePaths volume_paths(const fs::path& path) { return paths_for(path, ".vol"); }
FilePaths projection_paths(const fs::path& path) { return paths_for(path, ".proj"); }

fs::path write_volume(const Volume3D& volume, const fs::path& path, const Json& metadata) {
  const FilePaths paths = volume_paths(path);
  ensure_parent(paths.header);
  Json header = {
      {"format_version", kFormatVersion},
      {"dims", volume.dims()},
      {"voxel_size_mm", volume.voxel_size_mm()},
      {"order", kVolumeOrder},
      {"dtype", kDtype},
      {"raw_file", paths.raw.filename().string()},
  };
  if (!metadata.empty()) {
    header["metadata"] = metadata;
  }
  write_raw_f32(paths.raw, volume.data());
  write_json_file(header, paths.header);
  return paths.header;
}

Json read_volume_header(const fs::path& path) {
  const FilePaths paths = volume_paths(path);
  if (!fs::exists(paths.header)) {
    throw ValidationError("missing volume header " + paths.header.string());
  }
  Json header;
  try {
    header = read_json_file(paths.header);
  } catch (const ValidationError& e) {
    throw CorruptFileError(e.what());
  }
  check_header(header, paths.header, kVolumeOrder);
  return header;
}

Volume3D read_volume(const fs::path& path) {
  const FilePaths paths = volume_paths(path);
  const Json header = read_volume_header(path);
  const auto dims = field<GridDims>(header, "dims", paths.header);
  const auto voxel = field<double>(header, "voxel_size_mm", paths.header);
  if (dims.voxel_count() == 0 || !(voxel > 0.0)) {
    throw CorruptFileError(paths.header.string() + ": invalid dims or voxel size");
  }
  return {dims, voxel, read_raw_f32(raw_path_from_header(header, paths), dims.voxel_count())};
}

fs::path write_projections(const ProjectionSet& proj, const fs::path& path, const Json& metadata) {
  require(proj.angles_deg.size() == proj.n_views, "angles list length must equal n_views");
  require(proj.data.size() == proj.n_views * proj.view_size(), "projection data length does not match dims");
  const FilePaths paths = projection_paths(path);
  ensure_parent(paths.header);
  Json header = {
      {"format_version", kFormatVersion},
      {"n_views", proj.n_views},
      {"n_rows", proj.n_rows},
      {"n_bins", proj.n_bins},
      {"angles_deg", proj.angles_deg},
      {"kind", to_string(proj.kind)},
      {"order", kProjectionOrder},
      {"dtype", kDtype},
      {"raw_file", paths.raw.filename().string()},
  };
  if (!metadata.empty()) {
    header["metadata"] = metadata;
  }
  write_raw_f32(paths.raw, proj.data);
  write_json_file(header, paths.header);
  return paths.header;
}

Json read_projection_header(const fs::path& path) {
  const FilePaths paths = projection_paths(path);
  if (!fs::exists(paths.header)) {
    throw ValidationError("missing projection header " + paths.header.string());
  }
  Json header;
  try {
    header = read_json_file(paths.header);
  } catch (const ValidationError& e) {
    throw CorruptFileError(e.what());
  }
  check_header(header, paths.header, kProjectionOrder);
  return header;
}

ProjectionSet read_projections(const fs::path& path) {
  const FilePaths paths = projection_paths(path);
  const Json header = read_projection_header(path);
  ProjectionSet proj;
  proj.n_views = field<std::size_t>(header, "n_views", paths.header);
  proj.n_rows = field<std::size_t>(header, "n_rows", paths.header);
  proj.n_bins = field<std::size_t>(header, "n_bins", paths.header);
  proj.angles_deg = field<std::vector<double>>(header, "angles_deg", paths.header);
  if (proj.angles_deg.size() != proj.n_views) {
    throw CorruptFileError(paths.header.string() + ": angles_deg has " + std::to_string(proj.angles_deg.size()) +
                           " entries for " + std::to_string(proj.n_views) + " views");
  }
  try {
    proj.kind = count_kind_from_string(field<std::string>(header, "kind", paths.header));
  } catch (const ValidationError& e) {
    throw CorruptFileError(paths.header.string() + ": " + e.what());
  }
  proj.data = read_raw_f32(raw_path_from_header(header, paths), proj.n_views * proj.n_rows * proj.n_bins);
  return proj;
}

std::string to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::size_t DatasetManifest::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [split](const DatasetPair& p) { return p.split == split; }));
}

fs::path write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  Json pairs = Json::array();
  for (const auto& p : manifest.pairs) {
    pairs.push_back({{"patient_id", p.patient_id},
                     {"slice_index", p.slice_index},
                     {"high_path", p.high_path},
                     {"low_path", p.low_path},
                     {"split", to_string(p.split)},
                     {"norm_scale", p.norm_scale}});
  }
  const Json doc = {{"format_version", manifest.format_version},
                    {"n_train", manifest.count(Split::train)},
                    {"n_test", manifest.count(Split::test)},
                    {"pairs", pairs}};
  write_json_file(doc, path);
  return path;
}

DatasetManifest read_manifest(const fs::path& path, bool verify_files) {
  if (!fs::exists(path)) {
    throw ValidationError("missing manifest " + path.string());
  }
  Json doc;
  try {
    doc = read_json_file(path);
  } catch (const ValidationError& e) {
    throw CorruptFileError(e.what());
  }
  DatasetManifest manifest;
  manifest.format_version = doc.value("format_version", -1);
  if (manifest.format_version != kFormatVersion) {
    throw CorruptFileError(path.string() + ": unsupported format_version " + std::to_string(manifest.format_version));
  }
  const fs::path base = path.parent_path();
  for (const auto& entry : field<Json>(doc, "pairs", path)) {
    DatasetPair p;
    p.patient_id = field<std::string>(entry, "patient_id", path);
    p.slice_index = field<std::size_t>(entry, "slice_index", path);
    p.high_path = field<std::string>(entry, "high_path", path);
    p.low_path = field<std::string>(entry, "low_path", path);
    const auto split = field<std::string>(entry, "split", path);
    if (split != "train" && split != "test") {
      throw CorruptFileError(path.string() + ": unknown split '" + split + "'");
    }
    p.split = split == "train" ? Split::train : Split::test;
    p.norm_scale = field<double>(entry, "norm_scale", path);
    if (!(p.norm_scale > 0.0) || !std::isfinite(p.norm_scale)) {
      throw CorruptFileError(path.string() + ": norm_scale must be > 0");
    }
    if (verify_files) {
      for (const auto& rel : {p.high_path, p.low_path}) {
        const Json header = read_volume_header(base / rel);
        const auto dims = field<GridDims>(header, "dims", base / rel);
        const FilePaths fp = volume_paths(base / rel);
        const fs::path raw = raw_path_from_header(header, fp);
        if (!fs::exists(raw) || fs::file_size(raw) != dims.voxel_count() * 4) {
          throw CorruptFileError("manifest entry " + rel + " has a missing or truncated payload");
        }
      }
    }
    manifest.pairs.push_back(std::move(p));
  }
  return manifest;
}

DatasetManifest export_slice_pairs(const std::vector<Volume3D>& high, const std::vector<Volume3D>& low,
                                   const std::vector<std::string>& ids, const fs::path& out_dir,
                                   const std::vector<std::string>& test_ids) {
  require(high.size() == low.size() && high.size() == ids.size(),
          "export needs equally many high-noise volumes, low-noise volumes and ids");
  std::set<std::string> unique(ids.begin(), ids.end());
  require(unique.size() == ids.size(), "patient ids must be unique");
  for (const auto& id : ids) {
    require(!id.empty() && id.find_first_of("/\\") == std::string::npos, "invalid patient id '" + id + "'");
  }
  std::vector<double> scales(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(high[i].same_geometry(low[i]), "patient " + ids[i] + ": high/low volume dims differ");
    scales[i] = static_cast<double>(low[i].max_value());
    require(scales[i] > 0.0, "patient " + ids[i] + ": low-noise volume has no positive voxel");
  }
  const std::set<std::string> test(test_ids.begin(), test_ids.end());

  DatasetManifest manifest;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Split split = test.contains(ids[i]) ? Split::test : Split::train;
    const fs::path rel_dir = fs::path("slices") / ids[i];
    for (std::size_t z = 0; z < high[i].dims().nz; ++z) {
      char name[32];
      std::snprintf(name, sizeof(name), "z%03zu", z);
      const fs::path high_rel = rel_dir / (std::string("high_") + name);
      const fs::path low_rel = rel_dir / (std::string("low_") + name);
      write_volume(high[i].extract_slice(z), out_dir / high_rel);
      write_volume(low[i].extract_slice(z), out_dir / low_rel);
      manifest.pairs.push_back({ids[i], z, generic(volume_paths(high_rel).header), generic(volume_paths(low_rel).header),
                                split, scales[i]});
    }
  }
  fs::create_directories(out_dir);
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

// ---- JSON schemas -------------------------------------------------------

void to_json(Json& j, const GridDims& d) { j = Json::array({d.nx, d.ny, d.nz}); }

void from_json(const Json& j, GridDims& d) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError("dims must be an array [nx, ny, nz]");
  }
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      throw ValidationError("dims must be positive integers");
    }
  }
  d = {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

void to_json(Json& j, const OrganSpec& o) {
  j = {{"name", o.name},
       {"center_mm", o.shape.center_mm},
       {"semi_axes_mm", o.shape.semi_axes_mm},
       {"z_rotation_deg", o.shape.z_rotation_deg},
       {"uptake", o.uptake},
       {"mu", o.mu},
       {"priority", o.priority}};
}

void from_json(const Json& j, OrganSpec& o) {
  o.name = j.value("name", std::string{});
  o.shape.center_mm = j.value("center_mm", Vec3{0.0, 0.0, 0.0});
  o.shape.semi_axes_mm = j.at("semi_axes_mm").get<Vec3>();
  o.shape.z_rotation_deg = j.value("z_rotation_deg", 0.0);
  o.uptake = j.value("uptake", 0.0);
  o.mu = j.value("mu", 0.0);
  o.priority = j.value("priority", 0);
}

void to_json(Json& j, const PhantomSpec& s) {
  j = {{"grid_dims", s.grid_dims},
       {"voxel_size_mm", s.voxel_size_mm},
       {"background_uptake", s.background_uptake},
       {"background_mu", s.background_mu},
       {"seed", s.seed},
       {"organs", s.organs}};
}

void from_json(const Json& j, PhantomSpec& s) {
  if (!j.is_object()) {
    throw ValidationError("phantom spec must be a JSON object");
  }
  const GridDims dims = j.contains("grid_dims") ? j.at("grid_dims").get<GridDims>() : GridDims{128, 128, 114};
  const double voxel = j.value("voxel_size_mm", 4.0);
  s = torso_spec(dims, voxel);
  s.background_uptake = j.value("background_uptake", s.background_uptake);
  s.background_mu = j.value("background_mu", s.background_mu);
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("organs")) {
    s.organs = j.at("organs").get<std::vector<OrganSpec>>();
  }
}

void to_json(Json& j, const GeometryConfig& g) {
  j = {{"n_views", g.n_views}, {"arc_deg", g.arc_deg}, {"start_deg", g.start_deg},
       {"n_rows", g.n_rows},   {"n_bins", g.n_bins},   {"bin_size_mm", g.bin_size_mm}};
}

void from_json(const Json& j, GeometryConfig& g) {
  g = GeometryConfig{};
  g.n_views = j.value("n_views", g.n_views);
  g.arc_deg = j.value("arc_deg", g.arc_deg);
  g.start_deg = j.value("start_deg", g.start_deg);
  g.n_rows = j.value("n_rows", g.n_rows);
  g.n_bins = j.value("n_bins", g.n_bins);
  g.bin_size_mm = j.value("bin_size_mm", g.bin_size_mm);
}

void to_json(Json& j, const PsfModel& p) {
  j = {{"sigma0_mm", p.sigma0_mm}, {"sigma_slope", p.sigma_slope}, {"truncation_sigmas", p.truncation_sigmas}};
}

void from_json(const Json& j, PsfModel& p) {
  p = PsfModel{};
  p.sigma0_mm = j.value("sigma0_mm", p.sigma0_mm);
  p.sigma_slope = j.value("sigma_slope", p.sigma_slope);
  p.truncation_sigmas = j.value("truncation_sigmas", p.truncation_sigmas);
}

void to_json(Json& j, const NoiseConfig& n) {
  j = {{"target_total_counts", n.target_total_counts}, {"dose_scale", n.dose_scale}, {"seed", n.seed}};
}

void from_json(const Json& j, NoiseConfig& n) {
  n = NoiseConfig{};
  n.target_total_counts = j.value("target_total_counts", n.target_total_counts);
  n.dose_scale = j.value("dose_scale", n.dose_scale);
  n.seed = j.value("seed", n.seed);
}

void to_json(Json& j, const OsemConfig& c) {
  j = {{"n_iterations", c.n_iterations},
       {"n_subsets", c.n_subsets},
       {"epsilon", c.epsilon},
       {"model_psf_in_recon", c.model_psf_in_recon},
       {"initial_value", c.initial_value}};
}

void from_json(const Json& j, OsemConfig& c) {
  c = OsemConfig{};
  c.n_iterations = j.value("n_iterations", c.n_iterations);
  c.n_subsets = j.value("n_subsets", c.n_subsets);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.model_psf_in_recon = j.value("model_psf_in_recon", c.model_psf_in_recon);
  c.initial_value = j.value("initial_value", c.initial_value);
}

void to_json(Json& j, const MetricReport& r) {
  j = {{"nsd", r.nsd}, {"roi_mean", r.roi_mean}, {"roi_std", r.roi_std}, {"n_pixels", r.n_pixels}};
  if (r.rmse_vs_reference) {
    j["rmse_vs_reference"] = *r.rmse_vs_reference;
  }
}

void to_json(Json& j, const RoiMask& r) {
  Json pixels = Json::array();
  for (const auto& [y, x] : r.pixels) {
    pixels.push_back({y, x});
  }
  j = {{"slice_index", r.slice_index}, {"pixels", pixels}};
}

void from_json(const Json& j, RoiMask& r) {
  r.slice_index = j.at("slice_index").get<std::size_t>();
  r.pixels.clear();
  for (const auto& p : j.at("pixels")) {
    r.pixels.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
  }
}

}  // namespace spectsim
