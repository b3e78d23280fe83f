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

// Criterion 8: pole recovery of the rational fit.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "acceptance.h"
#include "blalab/ratfit.h"
#include "blalab/signal_gen.h"
#include "testing/oracles.h"

namespace blalab::acceptance {
namespace {

constexpr int kSystems = 100;
constexpr double kNoiselessPoleTol = 1e-6;   // absolute, rad/s
constexpr double kNoisyPoleRelTol = 0.01;
constexpr double kSnrDb = 40.0;

struct System {
  std::vector<double> num, den;
  std::vector<testing::Cplx> poles;
};

// Underdamped pair with its natural frequency inside the measured band and a
// random real zero, left or right half plane, within the band's reach.
System random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> fn(5.0, 150.0);
  std::uniform_real_distribution<double> zeta(0.02, 0.9);
  std::uniform_real_distribution<double> gain(0.2, 5.0);
  std::uniform_real_distribution<double> zero(-1200.0, 1200.0);
  const double wn = 2.0 * std::numbers::pi * fn(rng);
  const double z = zeta(rng);
  const double wd = wn * std::sqrt(1.0 - z * z);
  const std::vector<testing::Cplx> poles = {{-z * wn, -wd}, {-z * wn, wd}};
  System s;
  s.den = testing::poly_from_roots(poles);
  const double k = gain(rng) * s.den[0];
  const double q = zero(rng);
  s.num = {k, -k / q};  // zero at s = q
  s.poles = poles;
  return s;
}

// Largest distance from a true pole to its nearest fitted pole (fitted poles
// used at most once).
double pole_error(const std::vector<testing::Cplx>& truth,
                  const std::vector<Complex>& fitted, bool relative) {
  if (fitted.size() != truth.size()) return INFINITY;
  std::vector<bool> used(fitted.size(), false);
  double worst = 0.0;
  for (const auto& t : truth) {
    double best = INFINITY;
    std::size_t bj = 0;
    for (std::size_t j = 0; j < fitted.size(); ++j) {
      if (!used[j] && std::abs(fitted[j] - t) < best) {
        best = std::abs(fitted[j] - t);
        bj = j;
      }
    }
    used[bj] = true;
    worst = std::max(worst, relative ? best / std::abs(t) : best);
  }
  return worst;
}

Outcome rational_fit() {
  MultisineSpec grid;
  grid.n_samples = 4883;
  grid.fs = 2440.0;
  grid.excited_harmonics = harmonic_grid(3, 2, 399);
  const auto freqs = grid.excited_frequencies();

  std::mt19937_64 rng(808);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double noise_rel = std::pow(10.0, -kSnrDb / 20.0);
  double worst_abs = 0.0, worst_rel = 0.0;
  int fails = 0;
  for (int i = 0; i < kSystems; ++i) {
    const auto sys = random_system(rng);
    std::vector<Complex> g, noisy;
    std::vector<double> weights;
    for (double f : freqs) {
      const auto g0 = testing::tf_at_hz(sys.num, sys.den, f);
      g.push_back(g0);
      // Complex circular noise at 40 dB below the local response.
      const double sd = noise_rel * std::abs(g0);
      noisy.push_back(g0 + Complex(nd(rng), nd(rng)) * (sd / std::sqrt(2.0)));
      weights.push_back(1.0 / (sd * sd));
    }
    FitSpec spec;
    spec.den_order = 2;
    spec.num_order = 1;
    const auto clean = fit_rational(freqs, g, spec);
    spec.weights = weights;
    const auto fitted = fit_rational(freqs, noisy, spec);
    const double ea = pole_error(sys.poles, clean.poles, false);
    const double er = pole_error(sys.poles, fitted.poles, true);
    worst_abs = std::max(worst_abs, ea);
    worst_rel = std::max(worst_rel, er);
    if (!(ea < kNoiselessPoleTol) || !(er < kNoisyPoleRelTol)) ++fails;
  }
  return {fails == 0,
          fmt::format("{} systems: noiseless max |pole err| {:.3g} rad/s, "
                      "40 dB max relative pole err {:.4f}, {} failing",
                      kSystems, worst_abs, worst_rel, fails)};
}

}  // namespace

std::vector<Criterion> fit_criteria() {
  return {{8, "rational fit pole recovery", rational_fit}};
}

}  // namespace blalab::acceptance
