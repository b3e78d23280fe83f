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

#include "blalab/pipeline.h"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <type_traits>

#include "blalab/error.h"
#include "blalab/parallel.h"
#include "json.hpp"

namespace blalab {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Re-raises a library error with `where` prepended, keeping its category so
// the CLI exit code still reflects it.
template <typename Fn>
auto with_context(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", where, e.what()));
  } catch (const NumericError& e) {
    throw NumericError(fmt::format("{}: {}", where, e.what()));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", where, e.what()));
  }
}

MultisineSpec at_setting(const MultisineSpec& base, double dc, double std) {
  MultisineSpec s = base;
  s.dc = dc;
  s.std = std;
  return s;
}

ExperimentSetup setup_for(const PipelineConfig& cfg, double dc, double std,
                          std::uint64_t stream) {
  ExperimentSetup s;
  s.signal = at_setting(cfg.signal, dc, std);
  s.realizations = cfg.realizations;
  s.periods = cfg.periods;
  s.noise_std = cfg.noise_std;
  s.stream_seed = stream;
  return s;
}

// One experiment: record, BLA and (optionally) the fitted model with its
// bootstrap root uncertainty.
LevelResult analyze(const PipelineConfig& cfg, const SweepSetting& setting,
                    std::uint64_t stream, bool fit, const std::string& where) {
  LevelResult out;
  out.setting = setting;
  const auto rec = with_context(where + " (simulate)", [&] {
    return run_experiment(cfg.model,
                          setup_for(cfg, setting.dc, setting.std, stream));
  });
  out.bla = with_context(where + " (estimate)", [&] { return estimate_bla(rec); });
  out.mse = mse_of_bla(out.bla);
  if (!fit) return out;
  FitSpec spec;
  spec.num_order = cfg.num_order;
  spec.den_order = cfg.den_order;
  spec.weights = weight_from_variance(out.bla);
  out.model = with_context(where + " (fit)", [&] {
    return fit_rational(out.bla.freqs, out.bla.g_bla, spec);
  });
  out.uncertainty = with_context(where + " (bootstrap)", [&] {
    return bootstrap_root_uncertainty(rec, spec, out.model, cfg.n_boot,
                                      derive_seed(stream, ~0ull, 2),
                                      BootstrapWeights::kFromVariance);
  });
  return out;
}

void clear_marker(const fs::path& dir) {
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");
}

template <typename Fn>
auto guarded(const fs::path& dir, Fn&& fn) -> decltype(fn()) {
  clear_marker(dir);
  try {
    return fn();
  } catch (const std::exception& e) {
    write_text(dir / "FAILED", std::string(e.what()) + "\n");
    throw;
  }
}

json setting_json(const Setting& s) { return {{"dc", s.dc}, {"std", s.std}}; }

json point_json(const NormalizedPoint& p) { return json::array({p.x1, p.x2}); }

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

fs::path level_dir(std::size_t i) { return fmt::format("level_{:02d}", i); }

}  // namespace

std::vector<double> simulate(const SystemModel& model,
                             const SignalRealization& u,
                             const SimOptions& options) {
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NlMsdParams>) {
          return simulate_nl_msd(m, u, options);
        } else if constexpr (std::is_same_v<T, NlXfbParams>) {
          return simulate_nl_xfb(m, u, options);
        } else {
          return simulate_block_model(BlockModel{m}, u, options);
        }
      },
      model);
}

std::uint64_t experiment_stream(std::uint64_t global_seed, std::size_t index) {
  return derive_seed(global_seed, index);
}

ExperimentRecord run_experiment(const ModelConfig& model,
                                const ExperimentSetup& setup,
                                std::vector<TimeRecord>* time) {
  setup.signal.validate();
  if (setup.realizations < 2 || setup.periods < 2) {
    throw ConfigError("dimension error: need M >= 2 and P >= 2");
  }
  const std::size_t N = setup.signal.n_samples;
  const std::size_t P = setup.periods;
  const std::size_t transient =
      static_cast<std::size_t>(std::max(model.sim.transient_periods, 0));

  RecordMeta meta;
  meta.dc = setup.signal.dc;
  meta.std = setup.signal.std;
  meta.fs = setup.signal.fs;
  meta.n_samples = N;
  meta.excited_harmonics = setup.signal.excited_harmonics;
  for (std::size_t m = 0; m < setup.realizations; ++m) {
    meta.seeds.push_back(derive_seed(setup.stream_seed, m, 0));
  }
  ExperimentRecord rec(setup.realizations, P, meta);
  if (time) time->assign(setup.realizations, {});

  for (std::size_t m = 0; m < setup.realizations; ++m) {
    MultisineSpec spec = setup.signal;
    spec.seed = meta.seeds[m];
    const auto real = realize_multisine(spec, P + transient);
    auto y = simulate(model.model, real, model.sim);
    if (y.size() != P * N) {
      throw NumericError("simulator returned the wrong number of samples");
    }
    if (setup.noise_std > 0.0) {
      y = add_noise(y, setup.noise_std, derive_seed(setup.stream_seed, m, 1));
    }
    const auto& all = real.samples();
    std::vector<double> u(all.end() - static_cast<std::ptrdiff_t>(P * N),
                          all.end());
    rec.set_realization(m, u, y);
    if (time) (*time)[m] = TimeRecord{std::move(u), std::move(y)};
  }
  return rec;
}

int resolve_jobs(int requested) {
  if (const char* env = std::getenv("BLA_LAB_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError(
        fmt::format("BLA_LAB_JOBS must be a positive integer, got '{}'", env));
  }
  if (requested < 0) throw ConfigError("--jobs must be >= 0");
  return requested == 0 ? default_jobs() : requested;
}

double band_mean_total(const BlaEstimate& est) {
  if (est.var_total.empty()) return 0.0;
  return std::accumulate(est.var_total.begin(), est.var_total.end(), 0.0) /
         static_cast<double>(est.var_total.size());
}

void write_manifest(const fs::path& dir, const std::vector<fs::path>& artifacts,
                    std::uint64_t seed) {
  std::vector<fs::path> sorted = artifacts;
  std::sort(sorted.begin(), sorted.end());
  json files = json::array();
  for (const auto& rel : sorted) {
    const fs::path full = dir / rel;
    files.push_back({{"path", rel.generic_string()},
                     {"bytes", fs::file_size(full)},
                     {"sha256", sha256_file(full)}});
  }
  json j = {{"seed", seed}, {"artifacts", files}};
  write_text(dir / "manifest.json", j.dump(2) + "\n");
}

// ---- sweep ------------------------------------------------------------------

SweepOutcome compute_sweep(const PipelineConfig& cfg, int jobs) {
  cfg.validate();
  if (cfg.mode != PipelineMode::kSweep) {
    throw ConfigError("compute_sweep needs a sweep configuration");
  }
  const auto& levels = cfg.sweep->levels;
  SweepOutcome out;
  out.levels.resize(levels.size());
  parallel_for(levels.size(), jobs, [&](std::size_t i) {
    SweepSetting s{cfg.signal.dc, cfg.signal.std};
    (cfg.sweep->axis == SweepAxis::kDc ? s.dc : s.std) = levels[i];
    out.levels[i] = analyze(cfg, s, experiment_stream(cfg.seed, i), true,
                            fmt::format("level {}", i));
  });
  SweepResult sweep;
  for (const auto& l : out.levels) {
    sweep.settings.push_back(l.setting);
    sweep.models.push_back(l.model);
    sweep.root_uncertainties.push_back(l.uncertainty);
  }
  out.verdict = with_context("detect", [&] {
    return classify_structure(sweep, cfg.k_sigma);
  });
  return out;
}

SweepOutcome run_sweep(const PipelineConfig& cfg, int jobs) {
  const fs::path dir = cfg.output;
  return guarded(dir, [&] {
    SweepOutcome out = compute_sweep(cfg, jobs);
    auto& files = out.artifacts;
    std::vector<SweepSetting> settings;
    std::string summary =
        "level,dc,std,mse,band_mean_total,weighted_rms_residual,converged\n";
    std::string roots = "level,kind,index,re,im,std\n";
    for (std::size_t i = 0; i < out.levels.size(); ++i) {
      const auto& l = out.levels[i];
      settings.push_back(l.setting);
      write_bla_csv(dir / level_dir(i) / "bla.csv", l.bla);
      files.push_back(level_dir(i) / "bla.csv");
      write_model_json(dir / level_dir(i) / "model.json",
                       ModelFile{l.model, cfg.num_order, cfg.den_order,
                                 l.uncertainty, l.setting});
      files.push_back(level_dir(i) / "model.json");
      summary += fmt::format(
          "{},{},{},{},{},{},{}\n", i, format_double(l.setting.dc),
          format_double(l.setting.std), format_double(l.mse),
          format_double(band_mean_total(l.bla)),
          format_double(l.model.weighted_rms_residual),
          l.model.converged ? 1 : 0);
      auto add_roots = [&](const char* kind, const std::vector<Complex>& r,
                           const std::vector<double>& s) {
        for (std::size_t j = 0; j < r.size(); ++j) {
          roots += fmt::format("{},{},{},{},{},{}\n", i, kind, j,
                               format_double(r[j].real()),
                               format_double(r[j].imag()),
                               format_double(s[j]));
        }
      };
      add_roots("pole", l.model.poles, l.uncertainty.pole_std);
      add_roots("zero", l.model.zeros, l.uncertainty.zero_std);
    }
    write_settings_csv(dir / "settings.csv", settings);
    write_text(dir / "summary.csv", summary);
    write_text(dir / "roots.csv", roots);
    write_verdict_json(dir / "verdict.json", out.verdict, cfg.k_sigma);
    for (const char* f : {"settings.csv", "summary.csv", "roots.csv",
                          "verdict.json"}) {
      files.emplace_back(f);
    }
    write_manifest(dir, files, cfg.seed);
    return out;
  });
}

// ---- single -----------------------------------------------------------------

SingleOutcome run_single(const PipelineConfig& cfg, int jobs) {
  (void)jobs;
  cfg.validate();
  const fs::path dir = cfg.output;
  return guarded(dir, [&] {
    SingleOutcome out;
    const SweepSetting s{cfg.signal.dc, cfg.signal.std};
    const auto stream = experiment_stream(cfg.seed, 0);
    const auto rec = with_context("simulate", [&] {
      return run_experiment(cfg.model, setup_for(cfg, s.dc, s.std, stream));
    });
    out.bla = with_context("estimate", [&] { return estimate_bla(rec); });
    FitSpec spec;
    spec.num_order = cfg.num_order;
    spec.den_order = cfg.den_order;
    spec.weights = weight_from_variance(out.bla);
    out.model = with_context("fit", [&] {
      return fit_rational(out.bla.freqs, out.bla.g_bla, spec);
    });
    write_bla_csv(dir / "bla.csv", out.bla);
    write_model_json(dir / "model.json",
                     ModelFile{out.model, cfg.num_order, cfg.den_order,
                               std::nullopt, s});
    out.artifacts = {"bla.csv", "model.json"};
    write_manifest(dir, out.artifacts, cfg.seed);
    return out;
  });
}

// ---- design -----------------------------------------------------------------

namespace {

// Stream offsets keep plan rows, path points and grid cells independent.
constexpr std::size_t kPathStreamBase = 1000;
constexpr std::size_t kGridStreamBase = 100000;

}  // namespace

DesignOutcome compute_design(const PipelineConfig& cfg, int jobs) {
  cfg.validate();
  if (cfg.mode != PipelineMode::kDesign) {
    throw ConfigError("compute_design needs a design configuration");
  }
  const auto& def = *cfg.design;
  DesignOutcome out;
  out.plan = build_plan(def.region);
  const std::size_t rows = out.plan.rows();
  out.row_bla.resize(rows);
  out.row_mse.resize(rows);
  parallel_for(rows, jobs, [&](std::size_t i) {
    const auto& s = out.plan.settings[i];
    auto r = analyze(cfg, {s.dc, s.std}, experiment_stream(cfg.seed, i), false,
                     fmt::format("plan row {}", i));
    out.row_bla[i] = std::move(r.bla);
    out.row_mse[i] = r.mse;
  });

  if (!def.grid_dc.empty()) {
    const std::size_t nd = def.grid_dc.size();
    out.grid.resize(nd * def.grid_std.size());
    parallel_for(out.grid.size(), jobs, [&](std::size_t g) {
      const Setting s{def.grid_dc[g % nd], def.grid_std[g / nd]};
      auto r = analyze(cfg, {s.dc, s.std},
                       experiment_stream(cfg.seed, kGridStreamBase + g), false,
                       fmt::format("grid cell {}", g));
      out.grid[g] = {s, r.mse};
    });
  }

  out.surface = with_context("surface fit", [&] {
    return fit_surface(out.plan, out.row_mse);
  });
  out.extremum = with_context("extremum", [&] { return extremum(out.surface); });
  out.path = with_context("eigen path", [&] {
    return eigen_path(out.surface, out.extremum, def.region, def.n_points);
  });

  const std::size_t np = out.path.designed_points.size();
  out.path_bla.resize(np);
  out.path_mse.resize(np);
  parallel_for(np, jobs, [&](std::size_t j) {
    const auto& s = out.path.designed_points[j];
    auto r = analyze(cfg, {s.dc, s.std},
                     experiment_stream(cfg.seed, kPathStreamBase + j), false,
                     fmt::format("path point {}", j));
    out.path_bla[j] = std::move(r.bla);
    out.path_mse[j] = r.mse;
  });
  return out;
}

DesignOutcome run_design(const PipelineConfig& cfg, int jobs,
                         const std::string& design_name) {
  const fs::path dir = cfg.output;
  return guarded(dir, [&] {
    // Plan rows are written before the surface fit so that they survive a
    // degenerate-surface failure.
    DesignOutcome out;
    try {
      out = compute_design(cfg, jobs);
    } catch (const Error&) {
      const auto plan = build_plan(cfg.design->region);
      std::string text = "row,x1,x2,dc,std\n";
      for (std::size_t i = 0; i < plan.rows(); ++i) {
        text += fmt::format("{},{},{},{},{}\n", i,
                            format_double(plan.points[i].x1),
                            format_double(plan.points[i].x2),
                            format_double(plan.settings[i].dc),
                            format_double(plan.settings[i].std));
      }
      write_text(dir / "plan.csv", text);
      throw;
    }
    auto& files = out.artifacts;

    std::string plan = "row,x1,x2,dc,std,mse,band_mean_total\n";
    for (std::size_t i = 0; i < out.plan.rows(); ++i) {
      const auto& x = out.plan.points[i];
      const auto& s = out.plan.settings[i];
      plan += fmt::format("{},{},{},{},{},{},{}\n", i, format_double(x.x1),
                          format_double(x.x2), format_double(s.dc),
                          format_double(s.std), format_double(out.row_mse[i]),
                          format_double(band_mean_total(out.row_bla[i])));
      const fs::path rel = fs::path("rows") / fmt::format("row_{:02d}_bla.csv", i);
      write_bla_csv(dir / rel, out.row_bla[i]);
      files.push_back(rel);
    }
    write_text(dir / "plan.csv", plan);
    files.emplace_back("plan.csv");

    std::string path = "point,x1,x2,dc,std,mse,band_mean_total\n";
    for (std::size_t j = 0; j < out.path_bla.size(); ++j) {
      const auto& x = out.path.designed_normalized[j];
      const auto& s = out.path.designed_points[j];
      path += fmt::format("{},{},{},{},{},{},{}\n", j, format_double(x.x1),
                          format_double(x.x2), format_double(s.dc),
                          format_double(s.std), format_double(out.path_mse[j]),
                          format_double(band_mean_total(out.path_bla[j])));
      const fs::path rel =
          fs::path("path") / fmt::format("point_{:02d}_bla.csv", j);
      write_bla_csv(dir / rel, out.path_bla[j]);
      files.push_back(rel);
    }
    write_text(dir / "path.csv", path);
    files.emplace_back("path.csv");

    if (!out.grid.empty()) {
      std::string grid = "dc,std,mse,mse_db\n";
      for (const auto& c : out.grid) {
        grid += fmt::format("{},{},{},{}\n", format_double(c.setting.dc),
                            format_double(c.setting.std), format_double(c.mse),
                            format_double(10.0 * std::log10(c.mse)));
      }
      write_text(dir / "grid.csv", grid);
      files.emplace_back("grid.csv");
    }

    const auto& sf = out.surface;
    json coeffs = json::object();
    for (std::size_t t = 0; t < kNumTerms; ++t) {
      coeffs[std::string(term_name(t))] = {
          {"value", sf.coeffs[t]},
          {"active", sf.active[t]},
          {"t_value", finite_or_null(sf.t_values[t])},
          {"std", std::sqrt(std::max(0.0, sf.covariance[t * kNumTerms + t]))}};
    }
    json plan_rows = json::array();
    for (std::size_t i = 0; i < out.plan.rows(); ++i) {
      plan_rows.push_back({{"x", point_json(out.plan.points[i])},
                           {"setting", setting_json(out.plan.settings[i])},
                           {"mse", out.row_mse[i]}});
    }
    const auto& p = out.path;
    json designed = json::array();
    for (std::size_t j = 0; j < p.designed_points.size(); ++j) {
      designed.push_back({{"x", point_json(p.designed_normalized[j])},
                          {"setting", setting_json(p.designed_points[j])},
                          {"mse", out.path_mse[j]}});
    }
    const auto& r = cfg.design->region;
    json j = {
        {"region",
         {{"dc_min", r.dc_min}, {"dc_max", r.dc_max}, {"std_min", r.std_min},
          {"std_max", r.std_max}, {"dc_c", r.dc_c}, {"std_c", r.std_c},
          {"l_center", r.l_center}}},
        {"plan", plan_rows},
        {"surface",
         {{"coefficients", coeffs},
          {"rss", sf.rss},
          {"var_mse", sf.var_mse},
          {"exact_fit", sf.exact_fit},
          {"rss_history", sf.rss_history}}},
        {"extremum",
         {{"x", point_json(out.extremum.x_star)},
          {"setting", setting_json(denormalize(out.extremum.x_star, r))},
          {"kind", std::string(extremum_kind_name(out.extremum.kind))},
          {"value", out.extremum.value}}},
        {"q_matrix", p.q_matrix},
        {"eigenvalues", p.eigenvalues},
        {"eigenvectors", p.eigenvectors},
        {"direction", p.direction},
        {"lambda_min", p.lambda_min},
        {"designed", designed},
    };
    write_text(dir / design_name, j.dump(2) + "\n");
    files.emplace_back(design_name);
    write_manifest(dir, files, cfg.seed);
    return out;
  });
}

}  // namespace blalab
