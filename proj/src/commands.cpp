#include "spectsim/commands.hpp"

#include "spectsim/errors.hpp"

namespace spectsim::commands {

void phantom(const PhantomArgs& args) {
  PhantomSpec spec = args.spec_path ? read_json_file(*args.spec_path).get<PhantomSpec>() : default_torso_spec();
  if (args.seed) {
    spec.seed = *args.seed;
  }
  spec.validate();
  const PhantomVolumes vols = generate_phantom(spec);
  fs::create_directories(args.out_dir);
  write_json_file(Json(spec), args.out_dir / "spec.json");
  write_volume(vols.activity, args.out_dir / "activity");
  write_volume(vols.mu, args.out_dir / "mu");
}

void simulate(const SimulateArgs& args) {
  const Volume3D activity = read_volume(args.activity);
  const Volume3D mu = read_volume(args.mu);
  require(activity.same_geometry(mu), "activity and mu volumes differ in dims or voxel size");
  const GeometryConfig geom = geometry_for(activity, args.n_views, args.arc_deg, args.start_deg);
  check_geometry_matches(geom, activity);
  args.psf.validate();
  const NoiseConfig low_cfg{args.total_counts, kLowDoseScale, derive_seed(args.seed, 0, 2)};
  const NoiseConfig high_cfg{args.total_counts, args.dose_scale, derive_seed(args.seed, 0, 3)};
  low_cfg.validate();
  high_cfg.validate();

  const ProjectionSet expected =
      scale_to_total_counts(forward_project(activity, mu, geom, args.psf), args.total_counts);
  const ProjectionSet low = apply_poisson(expected, low_cfg);
  const ProjectionSet high = apply_poisson(expected, high_cfg);
  const double total = expected.sum();

  const Json common = {{"geometry", geom}, {"psf", args.psf}};
  auto meta = [&](const NoiseConfig& cfg) {
    Json m = common;
    m["dose_scale"] = cfg.dose_scale;
    m["seed"] = cfg.seed;
    m["expected_total"] = total * cfg.dose_scale;
    return m;
  };
  Json expected_meta = common;
  expected_meta["dose_scale"] = 1.0;
  expected_meta["expected_total"] = total;
  write_projections(expected, args.out_dir / "expected", expected_meta);
  write_projections(low, args.out_dir / "low", meta(low_cfg));
  write_projections(high, args.out_dir / "high", meta(high_cfg));
}

void recon(const ReconArgs& args) {
  args.osem.validate();
  const ProjectionSet proj = read_projections(args.proj);
  const Json header = read_projection_header(args.proj);
  const Volume3D mu = read_volume(args.mu);
  GeometryConfig geom = geometry_for(mu, proj.n_views);
  require(proj.n_rows == geom.n_rows && proj.n_bins == geom.n_bins,
          "projection rows/bins (" + std::to_string(proj.n_rows) + "x" + std::to_string(proj.n_bins) +
              ") do not match the attenuation map (" + std::to_string(geom.n_rows) + "x" + std::to_string(geom.n_bins) +
              ")");
  partition_subsets(proj.n_views, args.osem.n_subsets);
  PsfModel psf;
  if (args.psf) {
    psf = *args.psf;
  } else if (header.contains("metadata") && header["metadata"].contains("psf")) {
    psf = header["metadata"]["psf"].get<PsfModel>();
  }
  psf.validate();

  const Volume3D image = osem(proj, mu, geom, psf, args.osem);
  Json recon_meta = {{"algorithm", "osem"},
                     {"iterations", args.osem.n_iterations},
                     {"subsets", args.osem.n_subsets},
                     {"epsilon", args.osem.epsilon},
                     {"initial_value", args.osem.initial_value},
                     {"psf_in_recon", args.osem.model_psf_in_recon},
                     {"projections", projection_paths(args.proj).header.filename().string()}};
  if (args.osem.model_psf_in_recon) {
    recon_meta["psf"] = psf;
  }
  write_volume(image, args.out, {{"recon", recon_meta}});
}

Json metrics(const MetricsArgs& args) {
  const Volume3D volume = read_volume(args.volume);
  RoiMask roi;
  if (args.roi_path) {
    roi = read_json_file(*args.roi_path).get<RoiMask>();
  } else if (args.spec_path) {
    const auto spec = read_json_file(*args.spec_path).get<PhantomSpec>();
    require(spec.grid_dims == volume.dims(), "phantom spec grid does not match the volume");
    roi = liver_roi(spec, args.slice.value_or(mid_liver_slice(spec)));
  } else {
    throw ValidationError("metrics needs --roi or --spec");
  }
  MetricReport report = nsd(volume, roi);
  if (args.reference) {
    report.rmse_vs_reference = rmse(volume, read_volume(*args.reference));
  }
  Json out = report;
  out["slice_index"] = roi.slice_index;
  if (args.output) {
    write_json_file(out, *args.output);
  }
  return out;
}

DatasetManifest export_dataset(const ExportArgs& args) {
  require(args.high.size() == args.low.size(), "need as many --high as --low volumes");
  std::vector<std::string> ids = args.ids;
  if (ids.empty()) {
    for (std::size_t i = 0; i < args.high.size(); ++i) {
      ids.push_back(patient_id(i));
    }
  }
  require(ids.size() == args.high.size(), "need one --id per volume pair");
  std::vector<Volume3D> high;
  std::vector<Volume3D> low;
  for (std::size_t i = 0; i < args.high.size(); ++i) {
    high.push_back(read_volume(args.high[i]));
    low.push_back(read_volume(args.low[i]));
  }
  return export_slice_pairs(high, low, ids, args.out_dir, args.test_ids);
}

}  // namespace spectsim::commands
