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

// Declarative configuration files (YAML).
//
// A model file names the system variant and its blocks:
//
//   type: wiener_hammerstein     # or parallel_wh, nl_feedback, nl_msd, nl_xfb
//   front: {num: [1.0], den: [1.0, 0.5]}
//   nl: [0.0, 1.0, 0.0, 0.2]     # ascending polynomial coefficients
//   back: {num: [1.0], den: [1.0, 2.0]}
//   simulation: {oversample: 10, transient_periods: 1}
//
// nl_msd and nl_xfb start from the built-in defaults; any of their fields may
// be overridden (m, d, k1, k3 or forward, lowpass, gain).
//
// A region file holds dc_min, dc_max, std_min, std_max and optionally dc_c,
// std_c (default: middle of the range) and l_center.

#ifndef BLALAB_CONFIG_H_
#define BLALAB_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blalab/ccd_doe.h"
#include "blalab/signal_gen.h"
#include "blalab/sysmodels.h"

namespace blalab {

using SystemModel = std::variant<WienerHammerstein, ParallelWH, NlFeedback,
                                 NlMsdParams, NlXfbParams>;

struct ModelConfig {
  SystemModel model;
  SimOptions sim;
};

ModelConfig parse_model_config(const std::string& yaml_text);
ModelConfig load_model_config(const std::filesystem::path& path);

DoeRegion parse_region_config(const std::string& yaml_text);
DoeRegion load_region_config(const std::filesystem::path& path);

enum class PipelineMode { kSingle, kSweep, kDesign };

enum class SweepAxis { kDc, kStd };

struct SweepDefinition {
  SweepAxis axis = SweepAxis::kDc;
  std::vector<double> levels;
};

struct DesignDefinition {
  DoeRegion region;
  int n_points = 5;
  // Optional full grid (Table-style contour data).
  std::vector<double> grid_dc;
  std::vector<double> grid_std;
};

// Top-level pipeline file:
//
//   mode: sweep                  # single | sweep | design
//   signal: {n: 4883, fs: 2440, harmonics: "3:2:399", dc: 0.01, std: 0.05}
//   model: model.cfg             # path (relative to this file) or a mapping
//   noise_std: 1.0e-4
//   realizations: 8
//   periods: 2
//   fit: {na: 2, nb: 0}
//   bootstrap: 50
//   k_sigma: 3
//   sweep: {axis: dc, levels: [0.0, 0.05, 0.1, 0.15]}
//   design: {region: region.cfg, n_points: 5, grid: {dc: [...], std: [...]}}
//   output: out/
//   seed: 1
struct PipelineConfig {
  PipelineMode mode = PipelineMode::kSingle;
  MultisineSpec signal;  // dc/std act as defaults for the non-swept axis
  ModelConfig model;
  double noise_std = 0.0;
  std::size_t realizations = 8;
  std::size_t periods = 2;
  int num_order = 0;
  int den_order = 2;
  int n_boot = 50;
  double k_sigma = 3.0;
  std::optional<SweepDefinition> sweep;
  std::optional<DesignDefinition> design;
  std::filesystem::path output = "out";
  std::uint64_t seed = 1;

  void validate() const;
};

// Relative paths inside the text are resolved against `base_dir`.
PipelineConfig parse_pipeline_config(const std::string& yaml_text,
                                     const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace blalab

#endif  // BLALAB_CONFIG_H_
