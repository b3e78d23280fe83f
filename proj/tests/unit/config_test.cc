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

#include "blalab/config.h"

#include <gtest/gtest.h>
#include <unistd.h>

#include "blalab/error.h"
#include "blalab/io.h"

namespace blalab {
namespace {

TEST(ModelConfig, WienerHammerstein) {
  const auto cfg = parse_model_config(R"(
type: wiener_hammerstein
front: {num: [1.0], den: [1.0, 0.5]}
nl: [0.0, 1.0, 0.0, 0.2]
back: {num: [2.0], den: [2.0, 1.0]}
simulation: {oversample: 4, transient_periods: 2}
)");
  const auto& wh = std::get<WienerHammerstein>(cfg.model);
  EXPECT_EQ(wh.front.den, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(wh.nl.coeffs, (std::vector<double>{0.0, 1.0, 0.0, 0.2}));
  EXPECT_EQ(wh.back.num, std::vector<double>{2.0});
  EXPECT_EQ(cfg.sim.oversample, 4);
  EXPECT_EQ(cfg.sim.transient_periods, 2);
}

TEST(ModelConfig, OtherVariants) {
  const auto p = parse_model_config(R"(
type: parallel_wh
branches:
  - {nl: [0, 1]}
  - {nl: [0, 0, 0, 1], back: {num: [1], den: [1, 1]}}
)");
  EXPECT_EQ(std::get<ParallelWH>(p.model).branches.size(), 2u);

  const auto f = parse_model_config(R"(
type: nl_feedback
forward: {num: [400], den: [400, 12, 1]}
nl: [0, 0.5, 0, 0.1]
)");
  EXPECT_EQ(std::get<NlFeedback>(f.model).forward.den.size(), 3u);

  const auto m = parse_model_config("type: nl_msd\nk3: 0\n");
  const auto& msd = std::get<NlMsdParams>(m.model);
  EXPECT_EQ(msd.k3, 0.0);
  EXPECT_EQ(msd.k1, NlMsdParams::defaults().k1);

  EXPECT_NO_THROW(parse_model_config("type: nl_xfb\n"));
}

TEST(ModelConfig, Errors) {
  EXPECT_THROW(parse_model_config("type: volterra\n"), ConfigError);
  EXPECT_THROW(parse_model_config("front: {num: [1], den: [1, 1]}\n"),
               ConfigError);
  EXPECT_THROW(parse_model_config("type: wh\nnl: [0, 1\n"), ConfigError);
  EXPECT_THROW(parse_model_config("type: wh\nnl: oops\n"), ConfigError);
  EXPECT_THROW(parse_model_config("type: parallel_wh\nbranches: []\n"),
               ConfigError);
  EXPECT_THROW(parse_model_config("type: wh\nnl: [0,1,1,1,1,1,1,1,1,1,1]\n"),
               ConfigError);
  EXPECT_THROW(parse_model_config("- 1\n- 2\n"), ConfigError);
}

TEST(RegionConfig, DefaultsToTheMiddle) {
  const auto r = parse_region_config(
      "dc_min: 0.0\ndc_max: 0.1\nstd_min: 0.001\nstd_max: 0.11\n");
  EXPECT_DOUBLE_EQ(r.dc_c, 0.05);
  EXPECT_DOUBLE_EQ(r.std_c, 0.0555);
  EXPECT_EQ(r.l_center, 4);
  EXPECT_THROW(parse_region_config("dc_min: 1\ndc_max: 0\nstd_min: 0\nstd_max: 1\n"),
               ConfigError);
}

const char* kSweep = R"(
mode: sweep
signal: {n: 512, fs: 512, harmonics: "1:2:63", dc: 0.0, std: 0.2}
model: {type: wh, nl: [0, 1, 0, 0.5]}
noise_std: 1.0e-3
realizations: 8
fit: {na: 2, nb: 1}
bootstrap: 30
sweep: {axis: dc, levels: [0.0, 0.3, 0.6]}
output: results
seed: 42
)";

TEST(PipelineConfig, SweepFile) {
  const auto c = parse_pipeline_config(kSweep, "/base");
  EXPECT_EQ(c.mode, PipelineMode::kSweep);
  EXPECT_EQ(c.signal.n_samples, 512u);
  EXPECT_EQ(c.signal.excited_harmonics.size(), 32u);
  EXPECT_EQ(c.den_order, 2);
  EXPECT_EQ(c.num_order, 1);
  EXPECT_EQ(c.n_boot, 30);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.output, fs::path("/base/results"));
  ASSERT_TRUE(c.sweep.has_value());
  EXPECT_EQ(c.sweep->levels.size(), 3u);
}

TEST(PipelineConfig, ValidationErrors) {
  auto with = [](const std::string& from, const std::string& to) {
    std::string s = kSweep;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_THROW(parse_pipeline_config(with("levels: [0.0, 0.3, 0.6]", "levels: [0.0, 0.3]"), "."),
               ConfigError);
  EXPECT_THROW(parse_pipeline_config(with("axis: dc", "axis: phase"), "."),
               ConfigError);
  EXPECT_THROW(parse_pipeline_config(with("mode: sweep", "mode: fly"), "."),
               ConfigError);
  EXPECT_THROW(parse_pipeline_config(with("realizations: 8", "realizations: 1"), "."),
               ConfigError);
  EXPECT_THROW(parse_pipeline_config(with("bootstrap: 30", "bootstrap: 5"), "."),
               ConfigError);
  EXPECT_THROW(parse_pipeline_config(with("mode: sweep", "mode: single"), "."),
               ConfigError);
  EXPECT_THROW(parse_pipeline_config(with("harmonics: \"1:2:63\"", "harmonics: \"1:2:300\""), "."),
               ConfigError);
}

TEST(PipelineConfig, RelativeFilesResolveAgainstTheConfigDirectory) {
  const fs::path dir =
      fs::temp_directory_path() / ("blalab-cfg-" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir / "sub");
  write_text(dir / "sub" / "model.cfg", "type: nl_msd\n");
  write_text(dir / "sub" / "region.cfg",
             "dc_min: 0\ndc_max: 0.3\nstd_min: 0.02\nstd_max: 0.05\n");
  write_text(dir / "sub" / "run.yaml", R"(
mode: design
signal: {n: 4883, fs: 2440, harmonics: "3:2:399"}
model: model.cfg
design: {region: region.cfg, n_points: 5}
)");
  const auto c = load_pipeline_config(dir / "sub" / "run.yaml");
  EXPECT_TRUE(std::holds_alternative<NlMsdParams>(c.model.model));
  ASSERT_TRUE(c.design.has_value());
  EXPECT_DOUBLE_EQ(c.design->region.dc_max, 0.3);
  EXPECT_EQ(c.output, dir / "sub" / "out");
  EXPECT_THROW(load_pipeline_config(dir / "missing.yaml"), ConfigError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace blalab
