#include "spectsim/pipeline.hpp"

#include <cstdio>
#include <functional>

#include "spectsim/errors.hpp"

namespace spectsim {

void PipelineConfig::validate() const {
  require(n_patients >= 1, "n_patients must be >= 1");
  require(test_patient_index < n_patients, "test_patient_index must be < n_patients");
  phantom.validate();
  require(phantom.find_organ("liver") != nullptr, "pipeline phantom needs a 'liver' organ for the NSD ROI");
  check_geometry_matches(geometry, Volume3D(phantom.grid_dims, phantom.voxel_size_mm));
  noise.validate();
  require(high_noise_dose_scale > 0.0 && high_noise_dose_scale <= 1.0, "high_noise_dose_scale must be in (0, 1]");
  osem.validate();
  partition_subsets(geometry.n_views, osem.n_subsets);
  psf.validate();
  require(!out_dir.empty(), "out_dir must not be empty");
}

void to_json(Json& j, const PipelineConfig& c) {
  j = {{"n_patients", c.n_patients},
       {"test_patient_index", c.test_patient_index},
       {"phantom", c.phantom},
       {"geometry", c.geometry},
       {"noise", c.noise},
       {"high_noise_dose_scale", c.high_noise_dose_scale},
       {"osem", c.osem},
       {"psf", c.psf},
       {"out_dir", c.out_dir.generic_string()},
       {"seed", c.seed}};
}

void from_json(const Json& j, PipelineConfig& c) {
  if (!j.is_object()) {
    throw ValidationError("pipeline config must be a JSON object");
  }
  c = PipelineConfig{};
  c.n_patients = j.value("n_patients", c.n_patients);
  c.test_patient_index = j.value("test_patient_index", c.test_patient_index);
  if (j.contains("phantom")) {
    c.phantom = j.at("phantom").get<PhantomSpec>();
  }
  const Json geom = j.value("geometry", Json::object());
  c.geometry = geom.get<GeometryConfig>();
  if (!geom.contains("n_rows")) c.geometry.n_rows = c.phantom.grid_dims.nz;
  if (!geom.contains("n_bins")) c.geometry.n_bins = c.phantom.grid_dims.nx;
  if (!geom.contains("bin_size_mm")) c.geometry.bin_size_mm = c.phantom.voxel_size_mm;
  if (j.contains("noise")) c.noise = j.at("noise").get<NoiseConfig>();
  c.high_noise_dose_scale = j.value("high_noise_dose_scale", c.high_noise_dose_scale);
  if (j.contains("osem")) c.osem = j.at("osem").get<OsemConfig>();
  if (j.contains("psf")) c.psf = j.at("psf").get<PsfModel>();
  c.out_dir = j.value("out_dir", c.out_dir.generic_string());
  c.seed = j.value("seed", c.seed);
}

void to_json(Json& j, const PipelineSummary& s) {
  Json patients = Json::array();
  for (const auto& p : s.patients) {
    patients.push_back({{"id", p.id},
                        {"expected_total", p.expected_total},
                        {"low_counts", p.low_counts},
                        {"high_counts", p.high_counts}});
  }
  j = {{"n_train_pairs", s.n_train_pairs},
       {"n_test_pairs", s.n_test_pairs},
       {"test_patient", s.test_patient},
       {"roi", s.roi},
       {"nsd_high", s.nsd_high},
       {"nsd_low", s.nsd_low},
       {"nsd_ratio_high_over_low", s.nsd_ratio()},
       {"patients", patients}};
}

std::string patient_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "patient_%02zu", index);
  return buf;
}

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ValidationError& e) {
    throw ValidationError("stage '" + stage + "': " + e.what());
  } catch (const CorruptFileError& e) {
    throw CorruptFileError("stage '" + stage + "': " + e.what());
  } catch (const std::exception& e) {
    throw Error("stage '" + stage + "': " + e.what());
  }
}

}  // namespace

PipelineSummary run_pipeline(const PipelineConfig& cfg) {
  in_stage("validate", [&] { cfg.validate(); });

  const auto specs = in_stage("population", [&] { return sample_population(cfg.phantom, cfg.n_patients, cfg.seed); });
  const PhantomSpec& test_spec = specs[cfg.test_patient_index];
  const RoiMask roi = in_stage("roi", [&] { return liver_roi(test_spec, mid_liver_slice(test_spec)); });

  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  // The tree's own location is left out so that relocated reruns compare equal.
  Json recorded = cfg;
  recorded.erase("out_dir");
  write_json_file(recorded, out / "config.json");

  PipelineSummary summary;
  summary.test_patient = patient_id(cfg.test_patient_index);
  summary.roi = roi;

  std::vector<Volume3D> highs;
  std::vector<Volume3D> lows;
  std::vector<std::string> ids;
  const auto angles = cfg.geometry.angles_deg();
  const OsemConfig& osem_cfg = cfg.osem;

  for (std::size_t i = 0; i < cfg.n_patients; ++i) {
    const std::string id = patient_id(i);
    const fs::path dir = out / "patients" / id;
    const std::string tag = " (" + id + ")";

    const PhantomVolumes phantom = in_stage("phantom" + tag, [&] {
      write_json_file(Json(specs[i]), dir / "spec.json");
      auto vols = generate_phantom(specs[i]);
      write_volume(vols.activity, dir / "activity");
      write_volume(vols.mu, dir / "mu");
      return vols;
    });

    PatientResult result{id};
    ProjectionSet low_counts;
    ProjectionSet high_counts;
    in_stage("simulate" + tag, [&] {
      const ProjectionSet raw = forward_project(phantom.activity, phantom.mu, cfg.geometry, cfg.psf);
      const ProjectionSet expected = scale_to_total_counts(raw, cfg.noise.target_total_counts);
      NoiseConfig low_noise{cfg.noise.target_total_counts, kLowDoseScale, derive_seed(cfg.seed, static_cast<std::uint32_t>(i), 2)};
      NoiseConfig high_noise{cfg.noise.target_total_counts, cfg.high_noise_dose_scale,
                             derive_seed(cfg.seed, static_cast<std::uint32_t>(i), 3)};
      low_counts = apply_poisson(expected, low_noise);
      high_counts = apply_poisson(expected, high_noise);
      result.expected_total = expected.sum();
      result.low_counts = low_counts.sum();
      result.high_counts = high_counts.sum();
      write_projections(expected, dir / "expected", {{"dose_scale", 1.0}, {"expected_total", result.expected_total}});
      write_projections(low_counts, dir / "low",
                        {{"dose_scale", low_noise.dose_scale}, {"seed", low_noise.seed},
                         {"expected_total", result.expected_total * low_noise.dose_scale}});
      write_projections(high_counts, dir / "high",
                        {{"dose_scale", high_noise.dose_scale}, {"seed", high_noise.seed},
                         {"expected_total", result.expected_total * high_noise.dose_scale}});
    });

    in_stage("recon" + tag, [&] {
      const Projector projector(phantom.mu, angles, osem_cfg.model_psf_in_recon ? cfg.psf : PsfModel::none());
      const Json meta = {{"recon", {{"algorithm", "osem"},
                                    {"iterations", osem_cfg.n_iterations},
                                    {"subsets", osem_cfg.n_subsets},
                                    {"psf_in_recon", osem_cfg.model_psf_in_recon}}}};
      Volume3D low = osem_with(projector, low_counts, osem_cfg);
      Volume3D high = osem_with(projector, high_counts, osem_cfg);
      write_volume(low, dir / "recon_low", meta);
      write_volume(high, dir / "recon_high", meta);
      lows.push_back(std::move(low));
      highs.push_back(std::move(high));
    });
    ids.push_back(id);
    summary.patients.push_back(result);
  }

  const DatasetManifest manifest = in_stage("export-dataset", [&] {
    return export_slice_pairs(highs, lows, ids, out / "dataset", {summary.test_patient});
  });
  summary.n_train_pairs = manifest.count(Split::train);
  summary.n_test_pairs = manifest.count(Split::test);

  in_stage("metrics", [&] {
    summary.nsd_high = nsd(highs[cfg.test_patient_index], roi);
    summary.nsd_low = nsd(lows[cfg.test_patient_index], roi);
    write_json_file(Json(summary), out / "summary.json");
  });
  return summary;
}

}  // namespace spectsim
