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

// Criteria 6 and 7: the CCD response surface and the eigen-path payoff.

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "acceptance.h"
#include "blalab/ccd_doe.h"
#include "blalab/parallel.h"
#include "blalab/pipeline.h"

namespace blalab::acceptance {
namespace {

// Criterion 6.
constexpr int kSurfaceSeeds = 50;
constexpr double kSurfaceNoise = 0.01;
constexpr double kCoeffRelTol = 0.05;
constexpr double kXStarTol = 0.05;
constexpr double kDirectionTolDeg = 2.0;

// A20, A11, A02, A10, A01, A00.
constexpr std::array<double, kNumTerms> kTrueSurface = {2.0, 0.5, 1.0,
                                                        0.1, 0.0, 3.0};

double true_surface(const NormalizedPoint& x) {
  const auto& a = kTrueSurface;
  return a[kA20] * x.x1 * x.x1 + a[kA11] * x.x1 * x.x2 +
         a[kA02] * x.x2 * x.x2 + a[kA10] * x.x1 + a[kA01] * x.x2 + a[kA00];
}

Outcome synthetic_surface() {
  const auto& a = kTrueSurface;
  // Analytic stationary point and least-curvature eigenvector.
  const double h11 = 2 * a[kA20], h12 = a[kA11], h22 = 2 * a[kA02];
  const double det = h11 * h22 - h12 * h12;
  const double xs1 = -(h22 * a[kA10] - h12 * a[kA01]) / det;
  const double xs2 = -(-h12 * a[kA10] + h11 * a[kA01]) / det;
  const double q11 = a[kA20], q12 = a[kA11] / 2, q22 = a[kA02];
  const double mean_q = (q11 + q22) / 2;
  const double rad = std::hypot((q11 - q22) / 2, q12);
  const double lam_lo = mean_q - rad, lam_hi = mean_q + rad;
  const double lam_small = std::abs(lam_lo) <= std::abs(lam_hi) ? lam_lo : lam_hi;
  // (Q - lambda I) v = 0  ->  v = (q12, lambda - q11).
  double v1 = q12, v2 = lam_small - q11;
  const double vn = std::hypot(v1, v2);
  v1 /= vn;
  v2 /= vn;

  const auto region = DoeRegion::centered(0.0, 0.2, 0.02, 0.1, 4);
  const auto plan = build_plan(region);
  std::array<double, kNumTerms> sum{};
  double worst_x = 0.0, worst_angle = 0.0;
  int inactive = 0;
  int seeds_within = 0;  // informational: every coefficient within tolerance
  for (int seed = 0; seed < kSurfaceSeeds; ++seed) {
    std::mt19937_64 rng(derive_seed(606, static_cast<std::uint64_t>(seed)));
    std::normal_distribution<double> nd(0.0, kSurfaceNoise);
    std::vector<double> mses;
    for (const auto& x : plan.points) mses.push_back(true_surface(x) + nd(rng));
    const auto sf = fit_surface(plan, mses);
    bool within = true;
    for (std::size_t t = 0; t < kNumTerms; ++t) {
      sum[t] += sf.coeffs[t];
      if (a[t] == 0.0) continue;
      if (!sf.active[t]) ++inactive;
      within = within &&
               std::abs(sf.coeffs[t] - a[t]) <= kCoeffRelTol * std::abs(a[t]);
    }
    seeds_within += within ? 1 : 0;
    const auto ext = extremum(sf);
    worst_x = std::max(worst_x,
                       std::hypot(ext.x_star.x1 - xs1, ext.x_star.x2 - xs2));
    const auto path = eigen_path(sf, ext, region);
    const double cosang = std::min(
        1.0, std::abs(path.direction[0] * v1 + path.direction[1] * v2));
    worst_angle = std::max(worst_angle, std::acos(cosang) * 180.0 / std::numbers::pi);
  }
  double worst_coeff = 0.0;
  std::string coeffs;
  for (std::size_t t = 0; t < kNumTerms; ++t) {
    if (a[t] == 0.0) continue;
    const double mean = sum[t] / kSurfaceSeeds;
    const double rel = std::abs(mean - a[t]) / std::abs(a[t]);
    worst_coeff = std::max(worst_coeff, rel);
    coeffs += fmt::format("{}{}={:.4f}", coeffs.empty() ? "" : " ",
                          term_name(t), mean);
  }
  const bool pass = worst_coeff <= kCoeffRelTol && inactive == 0 &&
                    worst_x <= kXStarTol && worst_angle <= kDirectionTolDeg;
  return {pass, fmt::format("{} seeds: mean coefficients [{}], worst mean rel "
                            "err {:.4f} ({} of {} seeds within tolerance "
                            "individually), true terms pruned {} times, max x* "
                            "err {:.4f}, max direction err {:.3f} deg",
                            kSurfaceSeeds, coeffs, worst_coeff, seeds_within,
                            kSurfaceSeeds, inactive,
                            worst_x, worst_angle)};
}

// ---- criterion 7 -------------------------------------------------------------

constexpr int kPathSeeds = 3;
constexpr double kPathSpreadTol = 0.25;

// Below the optimum std the output noise dominates the BLA variance (falling
// as 1/std^2); above it the cubic stiffness distortion does. A DC offset
// stiffens the spring and pushes the distortion onset to larger std until
// the induced quadratic term takes over, so the MSE has a bowl near
// dc 0.38, std 0.032 at this noise level. The region sits on that bowl and
// is kept small: further out the walls are steep and strongly asymmetric in
// linear scale, and the lack of fit then prunes the curvature terms. The DC
// span is the shorter one because the DC wall is the rougher of the two;
// the path then runs along DC and the corners pick up the std curvature.
PipelineConfig msd_design_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.mode = PipelineMode::kDesign;
  cfg.signal.n_samples = 4883;
  cfg.signal.fs = 2440.0;
  cfg.signal.excited_harmonics = harmonic_grid(3, 2, 399);
  cfg.model.model = NlMsdParams::defaults();
  cfg.noise_std = 2e-8;
  cfg.realizations = 512;
  cfg.periods = 2;
  cfg.seed = seed;
  DesignDefinition design;
  design.region = DoeRegion::centered(0.355, 0.405, 0.0265, 0.0375, 4);
  design.n_points = 5;
  cfg.design = design;
  return cfg;
}

Outcome eigen_path_payoff() {
  bool pass = true;
  std::string detail;
  for (int s = 0; s < kPathSeeds; ++s) {
    const auto out = compute_design(msd_design_config(derive_seed(717, s)), 1);
    double corner_min = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < out.plan.rows(); ++r) {
      const auto& x = out.plan.points[r];
      if (std::abs(std::abs(x.x1) - 1.0) < 1e-12 &&
          std::abs(std::abs(x.x2) - 1.0) < 1e-12) {
        corner_min = std::min(corner_min, band_mean_total(out.row_bla[r]));
      }
    }
    double path_max = 0.0;
    for (const auto& b : out.path_bla) {
      path_max = std::max(path_max, band_mean_total(b));
    }
    const auto [lo, hi] =
        std::minmax_element(out.path_mse.begin(), out.path_mse.end());
    const double spread = (*hi - *lo) / *lo;
    const bool ok = path_max <= corner_min && spread <= kPathSpreadTol;
    pass = pass && ok;
    const auto& p = out.path.designed_points;
    detail += fmt::format(
        "{}seed {}: {} at x* ({:.2f},{:.2f}), path ({:.3f},{:.4f})..({:.3f},{:.4f}) max band-mean total "
        "{:.3e} vs corner min {:.3e} ({:.2f}x), MSE spread {:.1f}%{}",
        detail.empty() ? "" : "; ", s,
        extremum_kind_name(out.extremum.kind), out.extremum.x_star.x1,
        out.extremum.x_star.x2, p.front().dc, p.front().std,
        p.back().dc, p.back().std, path_max, corner_min,
        corner_min / path_max, 100.0 * spread, ok ? "" : " FAIL");
  }
  return {pass, detail};
}

}  // namespace

std::vector<Criterion> design_criteria() {
  return {{6, "CCD surface recovery on a known quadratic", synthetic_surface},
          {7, "eigen-path payoff on the NL-MSD", eigen_path_payoff}};
}

}  // namespace blalab::acceptance
