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

// On-disk formats. All numbers are written as decimal text with 17
// significant digits so that reading them back is exact.
//
//   signal CSV     "# key=value" metadata lines, a `sample` header, one
//                  sample per line.
//   record dir     manifest.json (M, P, N, fs, harmonics, dc, std, seeds)
//                  plus one m<mmm>_p<pp>.csv per realization and period with
//                  columns time,u,y.
//   BLA CSV        f_hz,re_g,im_g,var_total,var_noise,var_stoch_nl.
//   model JSON     coefficients, roots, residual, convergence flag and
//                  optionally the bootstrap root uncertainties.
//   settings CSV   dc,std, one row per model of a sweep.

#ifndef BLALAB_IO_H_
#define BLALAB_IO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blalab/bla_robust.h"
#include "blalab/ccd_doe.h"
#include "blalab/ratfit.h"
#include "blalab/signal_gen.h"
#include "blalab/structdetect.h"

namespace blalab {

namespace fs = std::filesystem;

std::string format_double(double v);

// ---- signal CSV -----------------------------------------------------------

struct SignalFile {
  MultisineSpec spec;
  std::size_t periods = 0;
  std::vector<double> samples;
};

void write_signal_csv(const fs::path& path, const SignalRealization& real);
SignalFile read_signal_csv(const fs::path& path);

// ---- record directory -----------------------------------------------------

struct TimeRecord {
  std::vector<double> u;  // P * N samples
  std::vector<double> y;
};

void write_record_dir(const fs::path& dir, const RecordMeta& meta,
                      std::size_t periods,
                      const std::vector<TimeRecord>& realizations);
ExperimentRecord read_record_dir(const fs::path& dir);

// ---- BLA CSV --------------------------------------------------------------

void write_bla_csv(const fs::path& path, const BlaEstimate& est);

struct BlaTable {
  std::vector<double> freqs;
  std::vector<Complex> g;
  std::vector<double> var_total;
  std::vector<double> var_noise;
  std::vector<double> var_stoch_nl;
};
BlaTable read_bla_csv(const fs::path& path);

// Weights for a BLA read back from disk (same rule as weight_from_variance).
std::vector<double> weight_from_table(const BlaTable& table);

// ---- model JSON -----------------------------------------------------------

struct ModelFile {
  RationalModel model;
  int num_order = 0;
  int den_order = 0;
  std::optional<RootUncertainty> uncertainty;
  std::optional<SweepSetting> setting;
};

void write_model_json(const fs::path& path, const ModelFile& file);
ModelFile read_model_json(const fs::path& path);

// ---- sweep settings / verdict ---------------------------------------------

void write_settings_csv(const fs::path& path,
                        const std::vector<SweepSetting>& settings);
std::vector<SweepSetting> read_settings_csv(const fs::path& path);

void write_verdict_json(const fs::path& path, const StructureVerdict& verdict,
                        double k_sigma);

// ---- misc -----------------------------------------------------------------

std::string sha256_file(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace blalab

#endif  // BLALAB_IO_H_
