// relloc: measurement-induced relative-position localisation simulator.
// Subcommands: simulate1d, simulate3d, discriminate, tof.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relloc/analysis.hpp"
#include "relloc/discriminator.hpp"
#include "relloc/errors.hpp"
#include "relloc/io.hpp"
#include "relloc/tof.hpp"
#include "relloc/wave1d.hpp"
#include "relloc/wave3d.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SourceOptions {
  std::string spec = "mono:1.0";
  double lambda_ref_m = 400e-9;
  double bb_coverage = 0.999;
  std::string bb_weighting = "energy";
};

void add_source_options(CLI::App* cmd, SourceOptions& opts) {
  cmd->add_option("--source", opts.spec,
                  "photon source: mono:<wavelength in reference units> or "
                  "blackbody:<temperature K>")
      ->capture_default_str();
  cmd->add_option("--lambda-ref", opts.lambda_ref_m,
                  "reference wavelength in metres (converts blackbody draws "
                  "to simulation units)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--bb-coverage", opts.bb_coverage,
                  "spectral mass captured by the blackbody truncation band")
      ->check(CLI::Range(1e-6, 1.0 - 1e-9))
      ->capture_default_str();
  cmd->add_option("--bb-weighting", opts.bb_weighting,
                  "blackbody draw weighting: energy or photon")
      ->check(CLI::IsMember({"energy", "photon"}))
      ->capture_default_str();
}

relloc::SpectralSource make_source(const SourceOptions& opts) {
  const auto colon = opts.spec.find(':');
  const std::string kind = opts.spec.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? "" : opts.spec.substr(colon + 1);
  if (kind == "mono") {
    if (arg.empty())
      throw relloc::invalid_parameter_error("--source mono:<wavelength>");
    return relloc::SpectralSource::monochromatic(std::stod(arg));
  }
  if (kind == "blackbody") {
    if (arg.empty())
      throw relloc::invalid_parameter_error("--source blackbody:<temperature>");
    const auto weighting = opts.bb_weighting == "photon"
                               ? relloc::BlackbodyWeighting::PhotonCount
                               : relloc::BlackbodyWeighting::EnergyDensity;
    return relloc::SpectralSource::blackbody(std::stod(arg), opts.lambda_ref_m,
                                             opts.bb_coverage, weighting);
  }
  throw relloc::invalid_parameter_error(
      "--source must be mono:<wavelength> or blackbody:<temperature>");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

fs::path resolve_out_dir(const std::string& flag) {
  fs::path dir;
  if (!flag.empty()) {
    dir = flag;
  } else if (const char* env = std::getenv("RELLOC_OUT_DIR")) {
    dir = env;
  } else {
    dir = ".";
  }
  fs::create_directories(dir);
  return dir;
}

json source_config(const SourceOptions& opts) {
  json j;
  j["source"] = opts.spec;
  j["lambda_ref_m"] = opts.lambda_ref_m;
  j["bb_coverage"] = opts.bb_coverage;
  j["bb_weighting"] = opts.bb_weighting;
  return j;
}

struct Simulate1dOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int photons = 150;
  double d = 1.0;
  int grid = 2048;
  double p_max = 8.0;
  int p_bins = 1025;
  SourceOptions source;
};

int run_simulate1d(const Simulate1dOptions& opt) {
  const std::uint64_t seed = resolve_seed(opt.seed);
  const fs::path dir = resolve_out_dir(opt.out_dir);
  const relloc::SpectralSource source = make_source(opt.source);

  relloc::RandomStream rng(seed);
  relloc::LocalisationEngine1D engine(opt.grid, opt.d);
  const relloc::LocalisationResult result =
      engine.run(opt.photons, source, rng);

  const std::vector<double> density = relloc::position_density(result.state);
  std::vector<double> xs(density.size());
  for (int j = 0; j < result.state.size(); ++j) xs[j] = result.state.x(j);
  const relloc::MomentumDensity momentum = relloc::momentum_density(
      result.state, relloc::uniform_momentum_grid(opt.p_max, opt.p_bins));

  relloc::write_csv(dir / "position_density.csv",
                    "relloc simulate1d position density",
                    {"x[lambda]", "P[1/lambda]"}, {&xs, &density});
  relloc::write_csv(dir / "momentum_density.csv",
                    "relloc simulate1d momentum density",
                    {"p[h/lambda]", "Q[lambda/h]"}, {&momentum.p, &momentum.q});
  {
    std::vector<double> idx(result.log.events.size()),
        kind(result.log.events.size()), theta(result.log.events.size()),
        wl(result.log.events.size());
    for (std::size_t i = 0; i < result.log.events.size(); ++i) {
      const auto& e = result.log.events[i];
      idx[i] = static_cast<double>(i);
      kind[i] = e.kind == relloc::EventKind::Scattered ? 1.0 : 0.0;
      theta[i] = e.theta;
      wl[i] = e.wavelength;
    }
    relloc::write_csv(dir / "events.csv",
                      "relloc simulate1d event log (kind: 1 scattered, 0 "
                      "nonscattered)",
                      {"index", "kind", "theta[rad]", "wavelength[lambda]"},
                      {&idx, &kind, &theta, &wl});
  }

  json record;
  record["schema"] = relloc::kRunRecordSchema;
  record["command"] = "simulate1d";
  json config = source_config(opt.source);
  config["seed"] = seed;
  config["photons"] = opt.photons;
  config["d"] = opt.d;
  config["grid"] = opt.grid;
  config["p_max"] = opt.p_max;
  config["p_bins"] = opt.p_bins;
  config["angle_bins"] = relloc::kDefaultAngleBins;
  record["config"] = config;
  record["event_log"] = relloc::to_json(result.log);
  record["results"]["position_density"] = density;
  record["results"]["momentum_density"] = momentum.q;
  record["files"] = {"position_density.csv", "momentum_density.csv",
                     "events.csv"};
  relloc::write_run_record(dir / "run_record.json", record);

  std::cout << "simulate1d: " << opt.photons << " photons, seed " << seed
            << ", outputs in " << dir.string() << "\n";
  return 0;
}

struct Simulate3dOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int photons = 150;
  double d = 1.0;
  int grid = 64;
  int cloud_samples = 20000;
  SourceOptions source;
};

int run_simulate3d(const Simulate3dOptions& opt) {
  const std::uint64_t seed = resolve_seed(opt.seed);
  const fs::path dir = resolve_out_dir(opt.out_dir);
  const relloc::SpectralSource source = make_source(opt.source);

  relloc::RandomStream rng(seed);
  relloc::LocalisationEngine3D engine(opt.grid, opt.d);
  const relloc::LocalisationResult3D result =
      engine.run(opt.photons, source, rng);

  const auto marginals = relloc::marginal_densities(result.state);
  std::vector<double> coords(static_cast<std::size_t>(opt.grid));
  for (int i = 0; i < opt.grid; ++i) coords[i] = result.state.coord(i);
  relloc::write_csv(dir / "marginal_density.csv",
                    "relloc simulate3d axis marginals",
                    {"r[lambda]", "Px[1/lambda]", "Py[1/lambda]",
                     "Pz[1/lambda]"},
                    {&coords, &marginals[0], &marginals[1], &marginals[2]});

  const auto cloud =
      relloc::density_point_cloud(result.state, opt.cloud_samples, rng);
  {
    std::vector<double> px(cloud.size()), py(cloud.size()), pz(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      px[i] = cloud[i].x;
      py[i] = cloud[i].y;
      pz[i] = cloud[i].z;
    }
    relloc::write_csv(dir / "point_cloud.csv",
                      "relloc simulate3d density point cloud",
                      {"x[lambda]", "y[lambda]", "z[lambda]"},
                      {&px, &py, &pz});
  }
  {
    std::vector<double> idx(result.log.events.size()),
        kind(result.log.events.size()), theta(result.log.events.size()),
        phi(result.log.events.size()), wl(result.log.events.size());
    for (std::size_t i = 0; i < result.log.events.size(); ++i) {
      const auto& e = result.log.events[i];
      idx[i] = static_cast<double>(i);
      kind[i] = e.kind == relloc::EventKind::Scattered ? 1.0 : 0.0;
      theta[i] = e.theta;
      phi[i] = e.phi;
      wl[i] = e.wavelength;
    }
    relloc::write_csv(dir / "events.csv",
                      "relloc simulate3d event log (kind: 1 scattered, 0 "
                      "nonscattered)",
                      {"index", "kind", "theta[rad]", "phi[rad]",
                       "wavelength[lambda]"},
                      {&idx, &kind, &theta, &phi, &wl});
  }

  json record;
  record["schema"] = relloc::kRunRecordSchema;
  record["command"] = "simulate3d";
  json config = source_config(opt.source);
  config["seed"] = seed;
  config["photons"] = opt.photons;
  config["d"] = opt.d;
  config["grid"] = opt.grid;
  config["cloud_samples"] = opt.cloud_samples;
  record["config"] = config;
  record["event_log"] = relloc::to_json(result.log);
  record["results"]["marginal_x"] = marginals[0];
  record["results"]["marginal_y"] = marginals[1];
  record["results"]["marginal_z"] = marginals[2];
  record["files"] = {"marginal_density.csv", "point_cloud.csv", "events.csv"};
  relloc::write_run_record(dir / "run_record.json", record);

  std::cout << "simulate3d: " << opt.photons << " photons, seed " << seed
            << ", outputs in " << dir.string() << "\n";
  return 0;
}

struct DiscriminateOptions {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int runs = 20;
  int experiments = 300;
  std::vector<double> dp = {0.0};
  std::string truth = "delocalised";
  int photons = 150;
  double d = 1.0;
  int grid = 2048;
  double p_max = 8.0;
  int p_bins = 1025;
  unsigned threads = 0;
  SourceOptions source;
};

int run_discriminate(const DiscriminateOptions& opt) {
  const std::uint64_t seed = resolve_seed(opt.seed);
  const fs::path dir = resolve_out_dir(opt.out_dir);
  const relloc::SpectralSource source = make_source(opt.source);
  const relloc::Truth truth = opt.truth == "localised"
                                  ? relloc::Truth::Localised
                                  : relloc::Truth::Delocalised;
  relloc::ExperimentConfig config;
  config.grid_samples = opt.grid;
  config.half_width = opt.d;
  config.p_max = opt.p_max;
  config.momentum_points = opt.p_bins;

  std::vector<double> run_index(static_cast<std::size_t>(opt.runs) + 1);
  for (std::size_t r = 0; r < run_index.size(); ++r)
    run_index[r] = static_cast<double>(r);
  std::vector<std::vector<double>> curves;
  std::vector<std::string> columns = {"run"};
  std::vector<const std::vector<double>*> cols = {&run_index};
  for (const double dp : opt.dp) {
    curves.push_back(relloc::average_experiments(
        truth, opt.experiments, opt.runs, opt.photons, dp, source, seed,
        config, opt.threads));
    char name[64];
    std::snprintf(name, sizeof(name), "mean_p_nl[dp=%g]", dp);
    columns.push_back(name);
  }
  for (const auto& c : curves) cols.push_back(&c);
  relloc::write_csv(dir / "posterior_mean.csv",
                    "relloc discriminate mean posterior P_nl per run",
                    columns, cols);

  json record;
  record["schema"] = relloc::kRunRecordSchema;
  record["command"] = "discriminate";
  json config_json = source_config(opt.source);
  config_json["seed"] = seed;
  config_json["runs"] = opt.runs;
  config_json["experiments"] = opt.experiments;
  config_json["dp"] = opt.dp;
  config_json["truth"] = opt.truth;
  config_json["photons"] = opt.photons;
  config_json["d"] = opt.d;
  config_json["grid"] = opt.grid;
  config_json["p_max"] = opt.p_max;
  config_json["p_bins"] = opt.p_bins;
  record["config"] = config_json;
  for (std::size_t i = 0; i < opt.dp.size(); ++i) {
    char key[64];
    std::snprintf(key, sizeof(key), "mean_p_nl[dp=%g]", opt.dp[i]);
    record["results"][key] = curves[i];
  }
  record["files"] = {"posterior_mean.csv"};
  relloc::write_run_record(dir / "run_record.json", record);

  std::cout << "discriminate: truth=" << opt.truth << ", seed " << seed
            << ", " << opt.experiments << " experiments x " << opt.runs
            << " runs";
  for (std::size_t i = 0; i < opt.dp.size(); ++i)
    std::cout << (i ? "," : ";") << " mean P_nl(" << opt.runs
              << ") at dp=" << opt.dp[i] << ": " << curves[i].back();
  std::cout << "\n";
  return 0;
}

struct TofOptions {
  double mass_u = 87.0;
  double wavelength_m = 400e-9;
  double time_s = 5e-3;
  double detector_m = 10e-3;
  double dp = 0.5;
  double p_max = 8.0;
};

int run_tof(const TofOptions& opt) {
  relloc::TofParameters params;
  params.atom_mass_u = opt.mass_u;
  params.photon_wavelength_m = opt.wavelength_m;
  params.flight_time_s = opt.time_s;
  params.detector_length_m = opt.detector_m;
  params.momentum_resolution = opt.dp;
  const relloc::TofResult r = relloc::tof_resolution(params, opt.p_max);
  std::cout << "detector spatial resolution: " << r.spatial_resolution_m * 1e6
            << " um\n"
            << "displacement per h/lambda:   "
            << r.displacement_per_unit_momentum_m * 1e6 << " um\n"
            << "flight span at p_max=" << opt.p_max << ":      "
            << r.max_displacement_m * 1e3 << " mm ("
            << (r.fits_detector ? "fits" : "exceeds") << " detector "
            << opt.detector_m * 1e3 << " mm)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "relloc: stochastic photon-scattering localisation of the relative "
      "position of two delocalised particles, with a Bayesian protocol to "
      "distinguish measurement-induced localisation from pre-existing "
      "localisation.\nCSV outputs carry '#' headers naming columns and "
      "units; run_record.json snapshots the full configuration and seed."};
  app.require_subcommand(1);

  Simulate1dOptions s1;
  CLI::App* c1 = app.add_subcommand(
      "simulate1d", "1D localisation run: writes position_density.csv "
                    "(x[lambda],P[1/lambda]), momentum_density.csv "
                    "(p[h/lambda],Q[lambda/h]), events.csv, run_record.json");
  c1->add_option("--seed", s1.seed, "RNG seed (default: from entropy, recorded)");
  c1->add_option("--out-dir", s1.out_dir,
                 "output directory (default: $RELLOC_OUT_DIR or .)");
  c1->add_option("--photons", s1.photons, "number of scattering events")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c1->add_option("--d", s1.d, "half-width of the region, in wavelengths")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c1->add_option("--grid", s1.grid, "position grid samples")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  c1->add_option("--p-max", s1.p_max, "momentum grid half-range in h/lambda")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c1->add_option("--p-bins", s1.p_bins, "momentum grid points")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  add_source_options(c1, s1.source);

  Simulate3dOptions s3;
  CLI::App* c3 = app.add_subcommand(
      "simulate3d", "3D localisation run: writes marginal_density.csv, "
                    "point_cloud.csv (x,y,z[lambda]), events.csv, "
                    "run_record.json");
  c3->add_option("--seed", s3.seed, "RNG seed (default: from entropy, recorded)");
  c3->add_option("--out-dir", s3.out_dir,
                 "output directory (default: $RELLOC_OUT_DIR or .)");
  c3->add_option("--photons", s3.photons, "number of scattering events")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  c3->add_option("--d", s3.d, "half-width of the cube, in wavelengths")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c3->add_option("--grid", s3.grid, "grid samples per axis")
      ->check(CLI::Range(2, 512))
      ->capture_default_str();
  c3->add_option("--samples", s3.cloud_samples, "point-cloud sample count")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_source_options(c3, s3.source);

  DiscriminateOptions dc;
  CLI::App* cd = app.add_subcommand(
      "discriminate",
      "Bayesian signature protocol: writes posterior_mean.csv (column "
      "'run', one mean-P_nl column per --dp value) and run_record.json");
  cd->add_option("--seed", dc.seed, "RNG seed (default: from entropy, recorded)");
  cd->add_option("--out-dir", dc.out_dir,
                 "output directory (default: $RELLOC_OUT_DIR or .)");
  cd->add_option("--runs", dc.runs, "momentum measurements per experiment")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  cd->add_option("--experiments", dc.experiments, "independent experiments")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  cd->add_option("--dp", dc.dp,
                 "detector momentum resolutions in h/lambda (list; 0 = "
                 "perfect)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cd->add_option("--truth", dc.truth, "actual preparation in the simulation")
      ->check(CLI::IsMember({"delocalised", "localised"}))
      ->capture_default_str();
  cd->add_option("--photons", dc.photons, "scattering events per run")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cd->add_option("--d", dc.d, "half-width of the region, in wavelengths")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cd->add_option("--grid", dc.grid, "position grid samples")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  cd->add_option("--p-max", dc.p_max, "momentum grid half-range in h/lambda")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cd->add_option("--p-bins", dc.p_bins, "momentum grid points")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  cd->add_option("--threads", dc.threads,
                 "worker threads for the experiment batch (0 = all cores)")
      ->capture_default_str();
  add_source_options(cd, dc.source);

  TofOptions tf;
  CLI::App* ct = app.add_subcommand(
      "tof", "time-of-flight detector-resolution requirement");
  ct->add_option("--mass-u", tf.mass_u, "atom mass in atomic mass units")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--wavelength", tf.wavelength_m, "photon wavelength in metres")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--time", tf.time_s, "flight time in seconds")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ct->add_option("--detector", tf.detector_m, "detector length in metres")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ct->add_option("--dp", tf.dp, "momentum resolution in h/lambda")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ct->add_option("--p-max", tf.p_max, "largest momentum to resolve, h/lambda")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (c1->parsed()) return run_simulate1d(s1);
    if (c3->parsed()) return run_simulate3d(s3);
    if (cd->parsed()) return run_discriminate(dc);
    if (ct->parsed()) return run_tof(tf);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
