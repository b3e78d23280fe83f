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

// End-to-end runs: realize multisines, simulate, estimate the BLA, fit, and
// then either classify a sweep or run a CCD design.
//
// Seeds. Every experiment (sweep level, plan row, path point, grid cell) owns
// a stream seed derived from the global seed and its index. Realization m of
// that experiment uses derive_seed(stream, m, 0) for the multisine phases and
// derive_seed(stream, m, 1) for the output noise, so results do not depend on
// the number of worker threads.

#ifndef BLALAB_PIPELINE_H_
#define BLALAB_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blalab/bla_robust.h"
#include "blalab/ccd_doe.h"
#include "blalab/config.h"
#include "blalab/io.h"
#include "blalab/ratfit.h"
#include "blalab/structdetect.h"

namespace blalab {

// Output of the system for `u`, dropping the configured transient periods.
std::vector<double> simulate(const SystemModel& model,
                             const SignalRealization& u,
                             const SimOptions& options = {});

struct ExperimentSetup {
  MultisineSpec signal;  // dc and std give the operating point
  std::size_t realizations = 8;
  std::size_t periods = 2;
  double noise_std = 0.0;
  std::uint64_t stream_seed = 0;
};

// Runs M realizations. When `time` is given, the steady-state input and
// noisy output samples of each realization are stored there as well.
ExperimentRecord run_experiment(const ModelConfig& model,
                                const ExperimentSetup& setup,
                                std::vector<TimeRecord>* time = nullptr);

// Seed of experiment `index` within a run.
std::uint64_t experiment_stream(std::uint64_t global_seed, std::size_t index);

// BLA_LAB_JOBS overrides the requested job count when set to a positive
// integer; a request of 0 means "one per hardware thread".
int resolve_jobs(int requested);

struct LevelResult {
  SweepSetting setting;
  BlaEstimate bla;
  RationalModel model;
  RootUncertainty uncertainty;
  double mse = 0.0;
};

struct SweepOutcome {
  std::vector<LevelResult> levels;
  StructureVerdict verdict;
  std::vector<std::filesystem::path> artifacts;
};

// Sweep without touching the file system.
SweepOutcome compute_sweep(const PipelineConfig& config, int jobs);

// compute_sweep plus per-level bla.csv / model.json, settings.csv,
// summary.csv, roots.csv, verdict.json and manifest.json under
// config.output. On failure a FAILED file names the stage and level.
SweepOutcome run_sweep(const PipelineConfig& config, int jobs);

struct SingleOutcome {
  BlaEstimate bla;
  RationalModel model;
  std::vector<std::filesystem::path> artifacts;
};

SingleOutcome run_single(const PipelineConfig& config, int jobs);

struct GridCell {
  Setting setting;
  double mse = 0.0;
};

struct DesignOutcome {
  CcdPlan plan;
  std::vector<BlaEstimate> row_bla;
  std::vector<double> row_mse;
  QuadraticSurface surface;
  Extremum extremum;
  EigenPath path;
  std::vector<BlaEstimate> path_bla;
  std::vector<double> path_mse;
  std::vector<GridCell> grid;
  std::vector<std::filesystem::path> artifacts;
};

DesignOutcome compute_design(const PipelineConfig& config, int jobs);

// Writes plan.csv, row and path BLAs, path.csv, grid.csv (grid mode), the
// design summary `design_name` and manifest.json under config.output.
DesignOutcome run_design(const PipelineConfig& config, int jobs,
                         const std::string& design_name = "design.json");

// Band mean of the total-distortion variance.
double band_mean_total(const BlaEstimate& est);

// manifest.json: every listed artifact with its size and SHA-256, paths
// relative to `dir`.
void write_manifest(const std::filesystem::path& dir,
                    const std::vector<std::filesystem::path>& artifacts,
                    std::uint64_t seed);

}  // namespace blalab

#endif  // BLALAB_PIPELINE_H_
