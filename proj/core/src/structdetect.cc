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

#include "blalab/structdetect.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "blalab/error.h"
#include "blalab/parallel.h"

namespace blalab {
namespace {

constexpr char kCaveat[] =
    "Pole/zero movement patterns are necessary conditions for the listed "
    "structures, not sufficient ones: a verdict rules structures out rather "
    "than proving the detected one.";

constexpr double kTieTol = 1e-9;

// Matches every reference root to a distinct candidate, greedily by nearest
// distance. Returns nullopt when the counts differ.
std::optional<std::vector<Complex>> match_roots(
    const std::vector<Complex>& reference, const std::vector<Complex>& cand,
    bool* ambiguous) {
  if (reference.size() != cand.size()) return std::nullopt;
  std::vector<bool> used(cand.size(), false);
  std::vector<Complex> out(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = cand.size();
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(cand[j] - reference[i]);
      if (best_j < cand.size() &&
          std::abs(d - best) <= kTieTol * std::max(1.0, std::abs(reference[i]))) {
        // Tie: keep the farther candidate.
        *ambiguous = true;
        if (d > best) {
          best = d;
          best_j = j;
        }
      } else if (d < best) {
        best = d;
        best_j = j;
      }
    }
    used[best_j] = true;
    out[i] = cand[best_j];
  }
  return out;
}

std::vector<double> root_std(const std::vector<std::vector<Complex>>& reps,
                             std::size_t count) {
  std::vector<double> out(count, 0.0);
  if (reps.size() < 2) return out;
  for (std::size_t i = 0; i < count; ++i) {
    Complex mean(0.0);
    for (const auto& r : reps) mean += r[i];
    mean /= static_cast<double>(reps.size());
    double acc = 0.0;
    for (const auto& r : reps) acc += std::norm(r[i] - mean);
    out[i] = std::sqrt(acc / static_cast<double>(reps.size() - 1));
  }
  return out;
}

}  // namespace

std::string_view structure_name(Structure s) {
  switch (s) {
    case Structure::kWienerHammerstein:
      return "WH";
    case Structure::kParallelWH:
      return "ParallelWH";
    case Structure::kNlFeedback:
      return "NlFeedback";
    case Structure::kInconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

void SweepResult::validate() const {
  if (models.size() < 3) {
    throw ConfigError(fmt::format(
        "structure detection needs at least 3 experiments, got {}",
        models.size()));
  }
  if (settings.size() != models.size() ||
      root_uncertainties.size() != models.size()) {
    throw ConfigError("sweep settings, models and uncertainties differ in size");
  }
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].poles.size() != models[0].poles.size() ||
        models[i].zeros.size() != models[0].zeros.size()) {
      throw ConfigError(fmt::format(
          "inconsistent fit orders (experiment {} has {} poles / {} zeros, "
          "experiment 0 has {} / {})",
          i, models[i].poles.size(), models[i].zeros.size(),
          models[0].poles.size(), models[0].zeros.size()));
    }
    if (root_uncertainties[i].pole_std.size() != models[i].poles.size() ||
        root_uncertainties[i].zero_std.size() != models[i].zeros.size()) {
      throw ConfigError(fmt::format(
          "root uncertainties of experiment {} do not match its model", i));
    }
  }
}

RootUncertainty bootstrap_root_uncertainty(const ExperimentRecord& rec,
                                           const FitSpec& spec, int n_boot,
                                           std::uint64_t seed,
                                           BootstrapWeights weights) {
  const auto est = estimate_bla(rec);
  FitSpec point_spec = spec;
  if (weights == BootstrapWeights::kFromVariance) {
    point_spec.weights = weight_from_variance(est);
  }
  const auto point = fit_rational(est.freqs, est.g_bla, point_spec);
  return bootstrap_root_uncertainty(rec, spec, point, n_boot, seed, weights);
}

RootUncertainty bootstrap_root_uncertainty(const ExperimentRecord& rec,
                                           const FitSpec& spec,
                                           const RationalModel& point,
                                           int n_boot, std::uint64_t seed,
                                           BootstrapWeights weights) {
  if (n_boot < 20) throw ConfigError("bootstrap needs n_boot >= 20");
  const std::size_t M = rec.realizations();
  if (M < 4) throw ConfigError("bootstrap needs M >= 4 realizations");

  struct Replica {
    bool ok = false;
    bool ambiguous = false;
    std::vector<Complex> poles, zeros;
  };
  std::vector<Replica> replicas(static_cast<std::size_t>(n_boot));
  const auto freqs = rec.freqs();
  parallel_for(replicas.size(), default_jobs(), [&](std::size_t b) {
    std::mt19937_64 rng(derive_seed(seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, M - 1);
    std::vector<std::size_t> idx(M);
    for (auto& i : idx) i = pick(rng);
    Replica& rep = replicas[b];
    try {
      const auto est = estimate_bla(rec.select(idx));
      FitSpec replica_spec = spec;
      if (weights == BootstrapWeights::kFromVariance) {
        replica_spec.weights = weight_from_variance(est);
      }
      const auto model = fit_rational(freqs, est.g_bla, replica_spec);
      auto poles = match_roots(point.poles, model.poles, &rep.ambiguous);
      auto zeros = match_roots(point.zeros, model.zeros, &rep.ambiguous);
      if (!poles || !zeros) return;
      rep.poles = std::move(*poles);
      rep.zeros = std::move(*zeros);
      rep.ok = true;
    } catch (const NumericError&) {
      // A degenerate resample; it is left out.
    }
  });

  std::vector<std::vector<Complex>> pole_reps, zero_reps;
  RootUncertainty out;
  for (auto& rep : replicas) {
    if (!rep.ok) continue;
    out.ambiguous = out.ambiguous || rep.ambiguous;
    pole_reps.push_back(std::move(rep.poles));
    zero_reps.push_back(std::move(rep.zeros));
  }
  if (pole_reps.size() < static_cast<std::size_t>(n_boot) / 2) {
    throw NumericError(fmt::format(
        "bootstrap: only {} of {} replicas could be fitted", pole_reps.size(),
        n_boot));
  }
  out.pole_std = root_std(pole_reps, point.poles.size());
  out.zero_std = root_std(zero_reps, point.zeros.size());
  return out;
}

StructureVerdict classify_structure(const SweepResult& sweep, double k_sigma) {
  if (!(k_sigma > 0.0)) throw ConfigError("k_sigma must be positive");
  sweep.validate();
  const std::size_t E = sweep.models.size();

  // Canonical experiment order makes the verdict independent of how the
  // sweep was listed.
  std::vector<std::size_t> order(E);
  std::iota(order.begin(), order.end(), 0);
  auto key_less = [&](std::size_t a, std::size_t b) {
    const auto& sa = sweep.settings[a];
    const auto& sb = sweep.settings[b];
    if (sa.dc != sb.dc) return sa.dc < sb.dc;
    if (sa.std != sb.std) return sa.std < sb.std;
    const auto& pa = sweep.models[a].poles;
    const auto& pb = sweep.models[b].poles;
    return std::lexicographical_compare(
        pa.begin(), pa.end(), pb.begin(), pb.end(),
        [](const Complex& x, const Complex& y) {
          return x.real() != y.real() ? x.real() < y.real()
                                      : x.imag() < y.imag();
        });
  };
  std::stable_sort(order.begin(), order.end(), key_less);

  StructureVerdict verdict;
  verdict.caveat = kCaveat;

  auto build_tracks = [&](bool poles) {
    auto roots_of = [&](std::size_t e) -> const std::vector<Complex>& {
      return poles ? sweep.models[e].poles : sweep.models[e].zeros;
    };
    auto std_of = [&](std::size_t e) -> const std::vector<double>& {
      return poles ? sweep.root_uncertainties[e].pole_std
                   : sweep.root_uncertainties[e].zero_std;
    };
    const std::size_t R = roots_of(order[0]).size();
    // index[e][r] = position of track r's root within experiment order[e].
    std::vector<std::vector<std::size_t>> index(E, std::vector<std::size_t>(R));
    std::iota(index[0].begin(), index[0].end(), 0);
    for (std::size_t e = 1; e < E; ++e) {
      const auto& prev_roots = roots_of(order[e - 1]);
      const auto& cur = roots_of(order[e]);
      std::vector<bool> used(R, false);
      for (std::size_t r = 0; r < R; ++r) {
        const Complex prev = prev_roots[index[e - 1][r]];
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = R;
        for (std::size_t j = 0; j < R; ++j) {
          if (used[j]) continue;
          const double d = std::abs(cur[j] - prev);
          if (best_j < R &&
              std::abs(d - best) <= kTieTol * std::max(1.0, std::abs(prev))) {
            verdict.ambiguous_matching = true;
            if (d > best) {
              best = d;
              best_j = j;
            }
          } else if (d < best) {
            best = d;
            best_j = j;
          }
        }
        used[best_j] = true;
        index[e][r] = best_j;
      }
    }
    bool moved = false;
    for (std::size_t r = 0; r < R; ++r) {
      RootTrack track;
      track.is_pole = poles;
      for (std::size_t e = 0; e < E; ++e) {
        track.roots.push_back(roots_of(order[e])[index[e][r]]);
      }
      for (std::size_t a = 0; a < E; ++a) {
        for (std::size_t b = a + 1; b < E; ++b) {
          const Complex ra = track.roots[a];
          const Complex rb = track.roots[b];
          const double sa = std_of(order[a])[index[a][r]];
          const double sb = std_of(order[b])[index[b][r]];
          const double floor =
              1e-12 * std::max({std::abs(ra), std::abs(rb), 1e-300});
          const double combined =
              std::sqrt(sa * sa + sb * sb + floor * floor);
          const double disp = std::abs(ra - rb);
          if (disp > 0.0) track.score = std::max(track.score, disp / combined);
        }
      }
      moved = moved || track.score > k_sigma;
      verdict.tracks.push_back(std::move(track));
    }
    return moved;
  };

  verdict.pole_moved = build_tracks(true);
  verdict.zero_moved = build_tracks(false);
  if (!verdict.pole_moved && !verdict.zero_moved) {
    verdict.label = Structure::kWienerHammerstein;
  } else if (!verdict.pole_moved && verdict.zero_moved) {
    verdict.label = Structure::kParallelWH;
  } else if (verdict.pole_moved && !verdict.zero_moved) {
    verdict.label = Structure::kNlFeedback;
  } else {
    verdict.label = Structure::kInconclusive;
  }
  return verdict;
}

}  // namespace blalab
