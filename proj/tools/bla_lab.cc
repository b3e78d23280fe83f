/*
 * Copyright 2026 The bla-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// bla-lab: command line front end.
//
//   generate  realize a multisine into a signal CSV
//   simulate  run a model on a signal and write a record directory
//   estimate  robust-method BLA of a record directory
//   fit       rational model of a BLA CSV
//   detect    structure verdict from a sweep of fitted models
//   design    CCD experiment design on a simulated model
//   sweep     DC or STD sweep with structure detection
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure, 4 inconclusive
// structure verdict (detect and sweep; outputs are still written).

#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blalab/bla_robust.h"
#include "blalab/config.h"
#include "blalab/error.h"
#include "blalab/io.h"
#include "blalab/parallel.h"
#include "blalab/pipeline.h"
#include "blalab/ratfit.h"
#include "blalab/signal_gen.h"
#include "blalab/structdetect.h"

namespace {

namespace fs = std::filesystem;
using namespace blalab;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInconclusive = 4;

// Grid of the full DC/STD survey, in volts.
const std::vector<double> kGridDc = {0.00, 0.01, 0.02, 0.03, 0.04, 0.05,
                                     0.06, 0.07, 0.08, 0.09, 0.10};
const std::vector<double> kGridStd = {0.001, 0.002, 0.004, 0.006, 0.008, 0.010,
                                      0.020, 0.030, 0.040, 0.050, 0.060, 0.070,
                                      0.080, 0.090, 0.100, 0.110};

struct SignalFlags {
  std::size_t n = 4883;
  double fs = 2440.0;
  std::string harmonics = "3:2:399";
  double dc = 0.0;
  double std = 0.05;

  void add(CLI::App* app, bool with_level) {
    app->add_option("--n", n, "Samples per period")->capture_default_str();
    app->add_option("--fs", fs, "Sampling frequency [Hz]")->capture_default_str();
    app->add_option("--harmonics", harmonics,
                    "Excited harmonics, first:step:last or a comma list")
        ->capture_default_str();
    if (with_level) {
      app->add_option("--dc", dc, "Signal mean")->capture_default_str();
      app->add_option("--std", std, "Signal standard deviation")
          ->capture_default_str();
    }
  }

  MultisineSpec spec() const {
    MultisineSpec s;
    s.n_samples = n;
    s.fs = fs;
    s.excited_harmonics = parse_harmonics(harmonics);
    s.dc = dc;
    s.std = std;
    return s;
  }
};

struct RunFlags {
  std::string model;
  double noise_std = 0.0;
  std::size_t realizations = 8;
  std::size_t periods = 2;
  std::uint64_t seed = 1;
  int jobs = 0;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Model config file")->check(CLI::ExistingFile);
    app->add_option("--noise-std", noise_std, "Output noise std")
        ->capture_default_str();
    app->add_option("--realizations,-M", realizations, "Realizations")
        ->capture_default_str();
    app->add_option("--periods,-P", periods, "Periods per realization")
        ->capture_default_str();
    app->add_option("--seed", seed, "Global seed")->capture_default_str();
    app->add_option("--jobs,-j", jobs,
                    "Worker threads (0: all cores; BLA_LAB_JOBS overrides)")
        ->capture_default_str();
  }

  void fill(PipelineConfig& cfg) const {
    if (model.empty()) throw ConfigError("--model is required without --config");
    cfg.model = load_model_config(model);
    cfg.noise_std = noise_std;
    cfg.realizations = realizations;
    cfg.periods = periods;
    cfg.seed = seed;
  }
};

int cmd_generate(const MultisineSpec& spec, std::size_t periods,
                 const fs::path& out) {
  const auto real = realize_multisine(spec, periods);
  write_signal_csv(out, real);
  fmt::print("wrote {} ({} periods of {} samples)\n", out.string(), periods,
             spec.n_samples);
  return kExitOk;
}

int cmd_simulate(const std::string& model_path,
                 const std::vector<std::string>& signals, double noise_std,
                 std::optional<std::size_t> realizations,
                 std::optional<std::uint64_t> noise_seed, const fs::path& out) {
  const auto model = load_model_config(model_path);
  std::vector<SignalFile> files;
  for (const auto& s : signals) files.push_back(read_signal_csv(s));
  const auto& first = files.front().spec;
  for (const auto& f : files) {
    if (f.spec.n_samples != first.n_samples || f.spec.fs != first.fs ||
        f.spec.excited_harmonics != first.excited_harmonics ||
        f.spec.dc != first.dc || f.spec.std != first.std ||
        f.periods != files.front().periods) {
      throw ConfigError("signal files describe different experiments");
    }
  }
  // Either every file is a realization, or one file seeds M of them.
  std::vector<MultisineSpec> specs;
  if (realizations) {
    if (files.size() != 1) {
      throw ConfigError("--realizations takes exactly one --signal file");
    }
    for (std::size_t m = 0; m < *realizations; ++m) {
      MultisineSpec s = first;
      s.seed = derive_seed(first.seed, m, 0);
      specs.push_back(s);
    }
  } else {
    for (const auto& f : files) specs.push_back(f.spec);
  }
  const std::size_t P = files.front().periods;
  const std::size_t N = first.n_samples;
  const std::size_t transient =
      static_cast<std::size_t>(std::max(model.sim.transient_periods, 0));

  RecordMeta meta{first.dc, first.std, first.fs, N, first.excited_harmonics, {}};
  std::vector<TimeRecord> records;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const auto real = realize_multisine(specs[m], P + transient);
    if (!realizations) {
      // The file must be exactly what its metadata regenerates.
      const auto& want = files[m].samples;
      const auto& got = real.samples();
      for (std::size_t i = 0; i < want.size(); ++i) {
        const double d = want[i] - got[got.size() - want.size() + i];
        if (std::abs(d) > 1e-9 * (std::abs(first.dc) + first.std + 1.0)) {
          throw ConfigError(fmt::format(
              "{}: samples do not match the multisine in its metadata",
              signals[m]));
        }
      }
    }
    auto y = simulate(model.model, real, model.sim);
    if (noise_std > 0.0) {
      y = add_noise(y, noise_std,
                    derive_seed(noise_seed.value_or(specs[m].seed), m, 1));
    }
    const auto& all = real.samples();
    records.push_back(
        {std::vector<double>(all.end() - static_cast<std::ptrdiff_t>(P * N),
                             all.end()),
         std::move(y)});
    meta.seeds.push_back(specs[m].seed);
  }
  write_record_dir(out, meta, P, records);
  fmt::print("wrote {} ({} realizations x {} periods)\n", out.string(),
             records.size(), P);
  return kExitOk;
}

int cmd_estimate(const fs::path& rec_dir, const fs::path& out) {
  const auto rec = read_record_dir(rec_dir);
  const auto est = estimate_bla(rec);
  write_bla_csv(out, est);
  std::size_t ill = 0;
  for (bool b : est.ill_conditioned) ill += b ? 1 : 0;
  fmt::print("wrote {} ({} bins, MSE {:.6g}{})\n", out.string(), est.bins(),
             mse_of_bla(est),
             ill ? fmt::format(", {} ill-conditioned bins", ill) : "");
  return kExitOk;
}

int cmd_fit(const fs::path& bla, int na, int nb, int max_iters,
            const fs::path& out) {
  const auto table = read_bla_csv(bla);
  FitSpec spec;
  spec.den_order = na;
  spec.num_order = nb;
  spec.max_iters = max_iters;
  spec.weights = weight_from_table(table);
  const auto model = fit_rational(table.freqs, table.g, spec);
  write_model_json(out, ModelFile{model, nb, na, std::nullopt, std::nullopt});
  fmt::print("wrote {} (residual {:.6g}, {})\n", out.string(),
             model.weighted_rms_residual,
             model.converged ? "converged" : "NOT converged");
  return kExitOk;
}

int report_verdict(const StructureVerdict& v) {
  fmt::print("structure: {} (pole moved: {}, zero moved: {})\n",
             structure_name(v.label), v.pole_moved, v.zero_moved);
  fmt::print("note: {}\n", v.caveat);
  return v.label == Structure::kInconclusive ? kExitInconclusive : kExitOk;
}

int cmd_detect(const std::vector<std::string>& model_paths,
               const std::string& settings_path, double k_sigma,
               const fs::path& out) {
  SweepResult sweep;
  std::vector<SweepSetting> from_csv;
  if (!settings_path.empty()) from_csv = read_settings_csv(settings_path);
  if (!from_csv.empty() && from_csv.size() != model_paths.size()) {
    throw ConfigError(fmt::format("{} models but {} settings rows",
                                  model_paths.size(), from_csv.size()));
  }
  for (std::size_t i = 0; i < model_paths.size(); ++i) {
    auto f = read_model_json(model_paths[i]);
    if (!f.uncertainty) {
      throw ConfigError(fmt::format(
          "{}: no root uncertainty; produce models with `sweep`",
          model_paths[i]));
    }
    SweepSetting s;
    if (!from_csv.empty()) {
      s = from_csv[i];
    } else if (f.setting) {
      s = *f.setting;
    } else {
      throw ConfigError(fmt::format("{}: no setting and no --settings file",
                                    model_paths[i]));
    }
    sweep.settings.push_back(s);
    sweep.models.push_back(std::move(f.model));
    sweep.root_uncertainties.push_back(std::move(*f.uncertainty));
  }
  const auto verdict = classify_structure(sweep, k_sigma);
  write_verdict_json(out, verdict, k_sigma);
  return report_verdict(verdict);
}

int run_config(const PipelineConfig& cfg, int jobs, const std::string& name) {
  switch (cfg.mode) {
    case PipelineMode::kSingle: {
      const auto r = run_single(cfg, jobs);
      fmt::print("wrote {} (MSE {:.6g})\n", cfg.output.string(),
                 mse_of_bla(r.bla));
      return kExitOk;
    }
    case PipelineMode::kSweep: {
      const auto r = run_sweep(cfg, jobs);
      fmt::print("wrote {} ({} levels)\n", cfg.output.string(), r.levels.size());
      report_verdict(r.verdict);
      return kExitOk;  // only `detect` signals an inconclusive verdict
    }
    case PipelineMode::kDesign: {
      const auto r = run_design(cfg, jobs, name);
      fmt::print("extremum x* = ({:.4f}, {:.4f}) [{}], direction ({:.4f}, {:.4f})\n",
                 r.extremum.x_star.x1, r.extremum.x_star.x2,
                 extremum_kind_name(r.extremum.kind), r.path.direction[0],
                 r.path.direction[1]);
      for (const auto& s : r.path.designed_points) {
        fmt::print("  designed dc = {:.6g}, std = {:.6g}\n", s.dc, s.std);
      }
      return kExitOk;
    }
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Best linear approximation lab"};
  app.require_subcommand(0, 1);
  std::string config_path;
  int top_jobs = 0;
  app.add_option("--config", config_path,
                 "Run the pipeline described by a config file")
      ->check(CLI::ExistingFile);
  app.add_option("--jobs,-j", top_jobs, "Worker threads for --config runs");

  // generate
  auto* gen = app.add_subcommand("generate", "Realize a random-phase multisine");
  SignalFlags gen_sig;
  gen_sig.add(gen, true);
  std::size_t gen_periods = 1;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--periods", gen_periods, "Periods")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Phase seed")->capture_default_str();
  gen->add_option("--out,-o", gen_out, "Signal CSV")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a model on signals");
  std::string sim_model, sim_out;
  std::vector<std::string> sim_signals;
  double sim_noise = 0.0;
  std::optional<std::size_t> sim_realizations;
  std::optional<std::uint64_t> sim_noise_seed;
  sim->add_option("--model", sim_model, "Model config")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--signal", sim_signals, "Signal CSV(s), one per realization")
      ->required()
      ->check(CLI::ExistingFile);
  sim->add_option("--noise-std", sim_noise, "Output noise std");
  sim->add_option("--realizations,-M", sim_realizations,
                  "Derive M realizations from a single signal file");
  sim->add_option("--noise-seed", sim_noise_seed, "Noise seed");
  sim->add_option("--out,-o", sim_out, "Record directory")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Robust-method BLA of a record");
  std::string est_rec, est_out;
  est->add_option("--rec", est_rec, "Record directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  est->add_option("--out,-o", est_out, "BLA CSV")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a rational model to a BLA");
  std::string fit_bla, fit_out;
  int fit_na = 2, fit_nb = 0, fit_iters = 100;
  fit->add_option("--bla", fit_bla, "BLA CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--na", fit_na, "Denominator order")->capture_default_str();
  fit->add_option("--nb", fit_nb, "Numerator order")->capture_default_str();
  fit->add_option("--max-iters", fit_iters, "Iteration cap")->capture_default_str();
  fit->add_option("--out,-o", fit_out, "Model JSON")->required();

  // detect
  auto* det = app.add_subcommand("detect", "Classify block structure of a sweep");
  std::vector<std::string> det_models;
  std::string det_settings, det_out;
  double det_k = 3.0;
  det->add_option("--models", det_models, "Model JSON files of the sweep")
      ->required()
      ->check(CLI::ExistingFile);
  det->add_option("--settings", det_settings, "Sweep settings CSV (dc,std)")
      ->check(CLI::ExistingFile);
  det->add_option("--k-sigma", det_k, "Movement threshold")->capture_default_str();
  det->add_option("--out,-o", det_out, "Verdict JSON")->required();

  // design
  auto* des = app.add_subcommand("design", "CCD design of DC and STD");
  SignalFlags des_sig;
  des_sig.add(des, false);
  RunFlags des_run;
  des_run.add(des);
  std::string des_region, des_out, des_config;
  int des_points = 5;
  bool des_grid = false;
  std::vector<double> des_grid_dc, des_grid_std;
  des->add_option("--config", des_config, "Design pipeline config")
      ->check(CLI::ExistingFile);
  des->add_option("--region", des_region, "Region config")->check(CLI::ExistingFile);
  des->add_option("--points", des_points, "Designed points")->capture_default_str();
  des->add_flag("--grid", des_grid, "Also sweep the full DC/STD grid");
  des->add_option("--grid-dc", des_grid_dc, "Grid DC levels");
  des->add_option("--grid-std", des_grid_std, "Grid STD levels");
  des->add_option("--out,-o", des_out, "Design JSON")->required();

  // sweep
  auto* swp = app.add_subcommand("sweep", "DC or STD sweep with detection");
  SignalFlags swp_sig;
  swp_sig.add(swp, true);
  RunFlags swp_run;
  swp_run.add(swp);
  std::string swp_config, swp_axis = "dc", swp_out = "sweep.d";
  std::vector<double> swp_levels;
  int swp_na = 2, swp_nb = 0, swp_boot = 50;
  double swp_k = 3.0;
  swp->add_option("--config", swp_config, "Sweep pipeline config")
      ->check(CLI::ExistingFile);
  swp->add_option("--axis", swp_axis, "dc or std")
      ->check(CLI::IsMember({"dc", "std"}))
      ->capture_default_str();
  swp->add_option("--levels", swp_levels, "Levels of the swept quantity");
  swp->add_option("--na", swp_na, "Denominator order")->capture_default_str();
  swp->add_option("--nb", swp_nb, "Numerator order")->capture_default_str();
  swp->add_option("--bootstrap", swp_boot, "Bootstrap replicas")
      ->capture_default_str();
  swp->add_option("--k-sigma", swp_k, "Movement threshold")->capture_default_str();
  swp->add_option("--out,-o", swp_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*gen) {
    MultisineSpec spec = gen_sig.spec();
    spec.seed = gen_seed;
    return cmd_generate(spec, gen_periods, gen_out);
  }
  if (*sim) {
    return cmd_simulate(sim_model, sim_signals, sim_noise, sim_realizations,
                        sim_noise_seed, sim_out);
  }
  if (*est) return cmd_estimate(est_rec, est_out);
  if (*fit) return cmd_fit(fit_bla, fit_na, fit_nb, fit_iters, fit_out);
  if (*det) return cmd_detect(det_models, det_settings, det_k, det_out);
  if (*des) {
    const fs::path out(des_out);
    PipelineConfig cfg;
    if (!des_config.empty()) {
      cfg = load_pipeline_config(des_config);
      if (cfg.mode != PipelineMode::kDesign) {
        throw ConfigError("design: the config is not in design mode");
      }
    } else {
      if (des_region.empty()) throw ConfigError("design: --region is required");
      cfg.mode = PipelineMode::kDesign;
      cfg.signal = des_sig.spec();
      des_run.fill(cfg);
      DesignDefinition def;
      def.region = load_region_config(des_region);
      def.n_points = des_points;
      if (des_grid || !des_grid_dc.empty() || !des_grid_std.empty()) {
        def.grid_dc = des_grid_dc.empty() ? kGridDc : des_grid_dc;
        def.grid_std = des_grid_std.empty() ? kGridStd : des_grid_std;
      }
      cfg.design = def;
      cfg.signal.dc = def.region.dc_c;
      cfg.signal.std = def.region.std_c;
    }
    cfg.output = out.has_parent_path() ? out.parent_path() : fs::path(".");
    cfg.validate();
    return run_config(cfg, resolve_jobs(des_run.jobs), out.filename().string());
  }
  if (*swp) {
    PipelineConfig cfg;
    if (!swp_config.empty()) {
      cfg = load_pipeline_config(swp_config);
      if (cfg.mode != PipelineMode::kSweep) {
        throw ConfigError("sweep: the config is not in sweep mode");
      }
    } else {
      cfg.mode = PipelineMode::kSweep;
      cfg.signal = swp_sig.spec();
      swp_run.fill(cfg);
      cfg.sweep = SweepDefinition{
          swp_axis == "dc" ? SweepAxis::kDc : SweepAxis::kStd, swp_levels};
      cfg.den_order = swp_na;
      cfg.num_order = swp_nb;
      cfg.n_boot = swp_boot;
      cfg.k_sigma = swp_k;
      cfg.output = swp_out;
    }
    cfg.validate();
    return run_config(cfg, resolve_jobs(swp_run.jobs), "design.json");
  }
  if (!config_path.empty()) {
    const auto cfg = load_pipeline_config(config_path);
    return run_config(cfg, resolve_jobs(top_jobs), "design.json");
  }
  std::cout << app.help();
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "failure: {}\n", e.what());
    return kExitNumeric;
  }
}
