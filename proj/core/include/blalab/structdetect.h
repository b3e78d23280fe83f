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

// Structure detection from pole/zero movement of the BLA across a DC or STD
// sweep.
//
//   poles fixed, zeros fixed   -> Wiener-Hammerstein
//   poles fixed, zeros move    -> parallel Wiener-Hammerstein
//   poles move,  zeros fixed   -> nonlinear feedback
//   both move                  -> inconclusive
//
// These are necessary conditions only; the verdict carries that caveat.

#ifndef BLALAB_STRUCTDETECT_H_
#define BLALAB_STRUCTDETECT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "blalab/bla_robust.h"
#include "blalab/ratfit.h"

namespace blalab {

// Standard deviation of every pole and zero of a fitted model, in the
// canonical root order of that model.
struct RootUncertainty {
  std::vector<double> pole_std;
  std::vector<double> zero_std;
  // Some bootstrap replica had two roots equidistant (within 1e-9) from a
  // point-estimate root; the larger pairing distance was used.
  bool ambiguous = false;
};

struct SweepSetting {
  double dc = 0.0;
  double std = 0.0;
};

struct SweepResult {
  std::vector<SweepSetting> settings;
  std::vector<RationalModel> models;
  std::vector<RootUncertainty> root_uncertainties;

  void validate() const;
};

enum class Structure { kWienerHammerstein, kParallelWH, kNlFeedback, kInconclusive };

std::string_view structure_name(Structure s);

struct RootTrack {
  bool is_pole = true;
  std::vector<Complex> roots;  // one per experiment, in sweep order
  double score = 0.0;          // max pairwise displacement / combined std
};

struct StructureVerdict {
  Structure label = Structure::kInconclusive;
  bool pole_moved = false;
  bool zero_moved = false;
  std::vector<RootTrack> tracks;
  bool ambiguous_matching = false;
  std::string caveat;
};

// How the fit weights of a bootstrap replica are chosen.
enum class BootstrapWeights {
  kFixed,         // reuse spec.weights
  kFromVariance,  // weight_from_variance of the replica's own BLA
};

// Resamples the M realizations with replacement n_boot times, re-estimates
// and refits, and matches the replica roots to the point-estimate roots by
// nearest neighbor.
//
// When the point estimate was fitted with variance-derived weights, use
// kFromVariance: those weights are themselves estimated from the M
// realizations, and freezing them leaves their share of the scatter out.
RootUncertainty bootstrap_root_uncertainty(
    const ExperimentRecord& rec, const FitSpec& spec, int n_boot,
    std::uint64_t seed, BootstrapWeights weights = BootstrapWeights::kFixed);

// Same, with the point-estimate model supplied by the caller.
RootUncertainty bootstrap_root_uncertainty(
    const ExperimentRecord& rec, const FitSpec& spec,
    const RationalModel& point, int n_boot, std::uint64_t seed,
    BootstrapWeights weights = BootstrapWeights::kFixed);

StructureVerdict classify_structure(const SweepResult& sweep,
                                    double k_sigma = 3.0);

}  // namespace blalab

#endif  // BLALAB_STRUCTDETECT_H_
