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

// Central composite design over (DC, STD) and the quadratic response surface
// of the BLA mean square error.
//
// Coordinates are normalized as x1 = (dc - dc_c) / (ddc / 2),
// x2 = (std - std_c) / (dstd / 2), with ddc = dc_max - dc_min and likewise
// for std. The plan holds the four corners (+-1, +-1), the four axial points
// at radius sqrt(2) and l_center replicates of the center.
//
// The surface
//
//   mse = A20 x1^2 + A11 x1 x2 + A02 x2^2 + A10 x1 + A01 x2 + A00
//
// is fitted by least squares; coefficients whose t-value (estimate over its
// standard error, with the residual variance RSS / (n - p)) is below 3 are
// pruned one at a time. Around the stationary point x* the surface is the
// quadratic form x~' Q x~ with Q = [[A20, A11/2], [A11/2, A02]]; the
// eigenvector of the eigenvalue with the smallest magnitude is the direction
// along which the MSE varies least.

#ifndef BLALAB_CCD_DOE_H_
#define BLALAB_CCD_DOE_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace blalab {

struct DoeRegion {
  double dc_min = 0.0;
  double dc_max = 1.0;
  double std_min = 0.0;
  double std_max = 1.0;
  double dc_c = 0.5;
  double std_c = 0.5;
  int l_center = 4;

  // Center at the middle of both ranges.
  static DoeRegion centered(double dc_min, double dc_max, double std_min,
                            double std_max, int l_center = 4);
  void validate() const;
};

struct NormalizedPoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

struct Setting {
  double dc = 0.0;
  double std = 0.0;
};

NormalizedPoint normalize(const Setting& s, const DoeRegion& region);
Setting denormalize(const NormalizedPoint& x, const DoeRegion& region);

struct CcdPlan {
  std::vector<NormalizedPoint> points;
  std::vector<Setting> settings;
  DoeRegion region;

  std::size_t rows() const { return points.size(); }
};

CcdPlan build_plan(const DoeRegion& region);

// Coefficient order used throughout: A20, A11, A02, A10, A01, A00.
enum Term : std::size_t { kA20 = 0, kA11, kA02, kA10, kA01, kA00, kNumTerms };

std::string_view term_name(std::size_t term);

struct QuadraticSurface {
  std::array<double, kNumTerms> coeffs{};  // zero for inactive terms
  std::array<bool, kNumTerms> active{};
  // Covariance of the active coefficients, full 6x6 with zero rows/columns
  // for inactive terms, row-major.
  std::array<double, kNumTerms * kNumTerms> covariance{};
  std::array<double, kNumTerms> t_values{};  // +-inf when the fit is exact
  double rss = 0.0;
  double var_mse = 0.0;
  bool exact_fit = false;  // zero residual: pruning skipped
  // RSS after each refit, starting with the full model.
  std::vector<double> rss_history;

  double operator()(const NormalizedPoint& x) const;
  std::array<double, 2> gradient(const NormalizedPoint& x) const;
};

QuadraticSurface fit_surface(const CcdPlan& plan, std::span<const double> mses,
                             double t_threshold = 3.0);

// Fit on arbitrary points (the plan's points are not required).
QuadraticSurface fit_surface(std::span<const NormalizedPoint> points,
                             std::span<const double> mses,
                             double t_threshold = 3.0);

enum class ExtremumKind { kMinimum, kMaximum, kSaddle };

std::string_view extremum_kind_name(ExtremumKind kind);

struct Extremum {
  NormalizedPoint x_star;
  ExtremumKind kind = ExtremumKind::kMinimum;
  double value = 0.0;
};

Extremum extremum(const QuadraticSurface& surface);

struct EigenPath {
  NormalizedPoint x_star;
  std::array<double, 4> q_matrix{};  // row-major 2x2
  std::array<double, 2> eigenvalues{};  // ascending
  std::array<std::array<double, 2>, 2> eigenvectors{};  // matching order
  std::array<double, 2> direction{};  // unit, smallest |eigenvalue|
  double lambda_min = 0.0;            // eigenvalue along `direction`
  // Recentred coefficients (A~20, A~11, A~02, A~10, A~01, A~00).
  std::array<double, kNumTerms> recentred{};
  std::vector<NormalizedPoint> designed_normalized;
  std::vector<Setting> designed_points;
};

// Designed points are n_points equally spaced settings on the segment of the
// line through x* that lies inside the region box with std > 0.
EigenPath eigen_path(const QuadraticSurface& surface, const Extremum& x_star,
                     const DoeRegion& region, int n_points = 5);

}  // namespace blalab

#endif  // BLALAB_CCD_DOE_H_
