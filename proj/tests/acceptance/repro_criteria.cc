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

// Criterion 9: same seed, same bytes, whatever the job count.

#include <fmt/format.h>
#include <unistd.h>

#include <filesystem>
#include <numbers>
#include <set>

#include "acceptance.h"
#include "blalab/io.h"
#include "blalab/parallel.h"
#include "blalab/pipeline.h"

namespace blalab::acceptance {
namespace {

namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

LtiSystem first_order(double f_hz) {
  const double a = kTwoPi * f_hz;
  return {{a}, {a, 1.0}};
}

PipelineConfig sweep_config() {
  PipelineConfig cfg;
  cfg.mode = PipelineMode::kSweep;
  cfg.signal.n_samples = 512;
  cfg.signal.fs = 512.0;
  cfg.signal.excited_harmonics = harmonic_grid(1, 2, 63);
  cfg.signal.std = 0.3;
  cfg.model.model = ParallelWH{
      {WienerHammerstein{first_order(5.0), StaticNl::identity(), LtiSystem{}},
       WienerHammerstein{LtiSystem{}, StaticNl{{0.0, 0.05, 0.0, 0.5}},
                         first_order(40.0)}}};
  cfg.noise_std = 1e-3;
  cfg.realizations = 16;
  cfg.num_order = 1;
  cfg.den_order = 2;
  cfg.n_boot = 20;
  cfg.seed = 9001;
  cfg.sweep = SweepDefinition{SweepAxis::kStd, {0.1, 0.2, 0.3, 0.4}};
  return cfg;
}

// A wide NL-MSD region with a small M: the surface is a saddle, which is
// enough to exercise every stage including the path experiments.
PipelineConfig design_config() {
  PipelineConfig cfg;
  cfg.mode = PipelineMode::kDesign;
  cfg.signal.n_samples = 4883;
  cfg.signal.fs = 2440.0;
  cfg.signal.excited_harmonics = harmonic_grid(3, 2, 399);
  cfg.model.model = NlMsdParams::defaults();
  cfg.noise_std = 1e-7;
  cfg.realizations = 16;
  cfg.seed = derive_seed(707, 1);
  DesignDefinition design;
  design.region = DoeRegion::centered(0.0, 0.3, 0.02, 0.05, 4);
  design.grid_dc = {0.0, 0.15, 0.3};
  design.grid_std = {0.02, 0.05};
  cfg.design = design;
  return cfg;
}

std::set<fs::path> files_under(const fs::path& root) {
  std::set<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root));
  }
  return out;
}

// Compares two output trees; returns a description of the first difference
// or an empty string, and counts the CSV files compared.
std::string compare_trees(const fs::path& a, const fs::path& b, int* csv) {
  const auto fa = files_under(a);
  const auto fb = files_under(b);
  if (fa != fb) return "different file sets";
  for (const auto& rel : fa) {
    if (read_text(a / rel) != read_text(b / rel)) {
      return fmt::format("{} differs", rel.string());
    }
    if (rel.extension() == ".csv") ++*csv;
  }
  return {};
}

Outcome reproducibility() {
  const fs::path root =
      fs::temp_directory_path() / fmt::format("blalab-repro-{}", getpid());
  fs::remove_all(root);
  bool pass = true;
  std::string detail;
  auto check = [&](const std::string& what, auto&& run) {
    const fs::path a = root / (what + "-a");
    const fs::path b = root / (what + "-b");
    run(a, 1);
    run(b, 3);
    int csv = 0;
    std::string diff = compare_trees(a, b, &csv);
    if (fs::exists(a / "FAILED")) diff = "run failed: " + read_text(a / "FAILED");
    if (csv == 0 && diff.empty()) diff = "no CSV artifacts";
    pass = pass && diff.empty();
    detail += fmt::format("{}{}: {} CSV files{}", detail.empty() ? "" : "; ",
                          what, csv, diff.empty() ? " identical" : ", " + diff);
  };
  check("sweep", [](const fs::path& dir, int jobs) {
    auto cfg = sweep_config();
    cfg.output = dir;
    run_sweep(cfg, jobs);
  });
  check("design", [](const fs::path& dir, int jobs) {
    auto cfg = design_config();
    cfg.output = dir;
    run_design(cfg, jobs);
  });
  fs::remove_all(root);
  return {pass, detail + " (jobs 1 vs 3)"};
}

}  // namespace

std::vector<Criterion> repro_criteria() {
  return {{9, "bit-identical artifacts for a fixed seed", reproducibility}};
}

}  // namespace blalab::acceptance
