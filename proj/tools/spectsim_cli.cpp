// spectsim: low-dose SPECT simulation and OS-EM reconstruction.
//
//   spectsim phantom        [--spec spec.json] --out-dir DIR
//   spectsim simulate       --activity A --mu M --out-dir DIR [--total-counts N --dose-scale S --seed K]
//   spectsim recon          --proj P --mu M --out OUT [--iterations 5 --subsets 6 --psf-in-recon=false]
//   spectsim metrics        --volume V (--roi roi.json | --spec spec.json [--slice Z]) [--reference R]
//   spectsim export-dataset --high H... --low L... [--id ID...] [--test-id ID...] --out-dir DIR
//   spectsim pipeline       [--config cfg.json] [--out-dir DIR] [--seed K] [--print-config]
//
// Exit codes: 0 success, 2 invalid input, 3 runtime failure.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spectsim/commands.hpp"
#include "spectsim/errors.hpp"
#include "spectsim/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace spectsim;

  CLI::App app{"Low-dose SPECT simulation, OS-EM reconstruction and paired dataset export"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> config_path;
  bool print_config = false;
  app.add_option("--seed", seed, "Random seed")->configurable(false);
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_option("--config", config_path, "Pipeline configuration (JSON)");
  app.add_flag("--print-config", print_config, "Print the effective pipeline configuration and exit");

  // phantom
  auto* phantom_cmd = app.add_subcommand("phantom", "Generate activity and attenuation volumes");
  std::optional<std::string> spec_path;
  phantom_cmd->add_option("--spec", spec_path, "Phantom spec JSON (default: torso template)");
  phantom_cmd->fallthrough();

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Forward project and sample both dose levels");
  commands::SimulateArgs sim;
  std::string sim_activity;
  std::string sim_mu;
  simulate_cmd->add_option("--activity", sim_activity, "Activity volume")->required();
  simulate_cmd->add_option("--mu", sim_mu, "Attenuation volume (cm^-1)")->required();
  simulate_cmd->add_option("--views", sim.n_views, "Number of views")->capture_default_str();
  simulate_cmd->add_option("--arc-deg", sim.arc_deg, "Angular arc")->capture_default_str();
  simulate_cmd->add_option("--start-deg", sim.start_deg, "First view angle")->capture_default_str();
  simulate_cmd->add_option("--psf-sigma0", sim.psf.sigma0_mm, "PSF sigma at the detector face (mm)")->capture_default_str();
  simulate_cmd->add_option("--psf-slope", sim.psf.sigma_slope, "PSF sigma growth per mm of depth")->capture_default_str();
  simulate_cmd->add_option("--total-counts", sim.total_counts, "Low-noise total counts")->capture_default_str();
  simulate_cmd->add_option("--dose-scale", sim.dose_scale, "Dose scale of the high-noise scan")->capture_default_str();
  simulate_cmd->fallthrough();

  // recon
  auto* recon_cmd = app.add_subcommand("recon", "OS-EM reconstruction with attenuation correction");
  commands::ReconArgs rec;
  std::string rec_proj;
  std::string rec_mu;
  std::string rec_out;
  recon_cmd->add_option("--proj", rec_proj, "Projection set")->required();
  recon_cmd->add_option("--mu", rec_mu, "Attenuation volume")->required();
  recon_cmd->add_option("--out", rec_out, "Output volume")->required();
  recon_cmd->add_option("--iterations", rec.osem.n_iterations, "Iterations")->capture_default_str();
  recon_cmd->add_option("--subsets", rec.osem.n_subsets, "Subsets")->capture_default_str();
  recon_cmd->add_option("--epsilon", rec.osem.epsilon, "Division guard")->capture_default_str();
  recon_cmd->add_option("--psf-in-recon", rec.osem.model_psf_in_recon, "Model the PSF in the system matrix")
      ->capture_default_str();
  recon_cmd->fallthrough();

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "NSD on an ROI (and optional RMSE)");
  commands::MetricsArgs met;
  std::string met_volume;
  std::optional<std::string> met_roi;
  std::optional<std::string> met_spec;
  std::optional<std::string> met_reference;
  std::optional<std::string> met_output;
  metrics_cmd->add_option("--volume", met_volume, "Volume to evaluate")->required();
  metrics_cmd->add_option("--roi", met_roi, "ROI JSON {slice_index, pixels}");
  metrics_cmd->add_option("--spec", met_spec, "Phantom spec; uses the 82-pixel liver ROI");
  metrics_cmd->add_option("--slice", met.slice, "Slice for the liver ROI (default: mid-liver)");
  metrics_cmd->add_option("--reference", met_reference, "Reference volume for RMSE");
  metrics_cmd->add_option("--output", met_output, "Write the report here instead of stdout");
  metrics_cmd->fallthrough();

  // export-dataset
  auto* export_cmd = app.add_subcommand("export-dataset", "Export paired high/low-noise slices");
  commands::ExportArgs exp;
  std::vector<std::string> exp_high;
  std::vector<std::string> exp_low;
  export_cmd->add_option("--high", exp_high, "High-noise reconstructions")->required();
  export_cmd->add_option("--low", exp_low, "Low-noise reconstructions")->required();
  export_cmd->add_option("--id", exp.ids, "Patient ids (default patient_NN)");
  export_cmd->add_option("--test-id", exp.test_ids, "Patient ids held out for testing");
  export_cmd->fallthrough();

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run the full protocol end to end");
  pipeline_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    const fs::path out = out_dir.value_or(".");
    if (*phantom_cmd) {
      commands::PhantomArgs args;
      if (spec_path) args.spec_path = *spec_path;
      args.out_dir = out;
      args.seed = seed;
      commands::phantom(args);
    } else if (*simulate_cmd) {
      sim.activity = sim_activity;
      sim.mu = sim_mu;
      sim.out_dir = out;
      sim.seed = seed.value_or(0);
      commands::simulate(sim);
    } else if (*recon_cmd) {
      rec.proj = rec_proj;
      rec.mu = rec_mu;
      rec.out = rec_out;
      commands::recon(rec);
    } else if (*metrics_cmd) {
      met.volume = met_volume;
      if (met_roi) met.roi_path = *met_roi;
      if (met_spec) met.spec_path = *met_spec;
      if (met_reference) met.reference = *met_reference;
      if (met_output) met.output = *met_output;
      const Json report = commands::metrics(met);
      if (!met.output) {
        std::cout << report.dump(2) << '\n';
      }
    } else if (*export_cmd) {
      exp.high.assign(exp_high.begin(), exp_high.end());
      exp.low.assign(exp_low.begin(), exp_low.end());
      exp.out_dir = out;
      const auto manifest = commands::export_dataset(exp);
      std::cout << "exported " << manifest.count(Split::train) << " train and " << manifest.count(Split::test)
                << " test pairs\n";
    } else if (*pipeline_cmd) {
      PipelineConfig cfg;
      if (config_path) {
        cfg = read_json_file(*config_path).get<PipelineConfig>();
      }
      if (out_dir) cfg.out_dir = *out_dir;
      if (seed) cfg.seed = *seed;
      if (print_config) {
        std::cout << Json(cfg).dump(2) << '\n';
        return 0;
      }
      const PipelineSummary summary = run_pipeline(cfg);
      std::cout << Json(summary).dump(2) << '\n';
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CorruptFileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid JSON input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
