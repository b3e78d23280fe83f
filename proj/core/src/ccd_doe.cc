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

#include "blalab/ccd_doe.h"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blalab/error.h"

namespace blalab {
namespace {

std::array<double, kNumTerms> regressors(const NormalizedPoint& x) {
  return {x.x1 * x.x1, x.x1 * x.x2, x.x2 * x.x2, x.x1, x.x2, 1.0};
}

struct LsFit {
  std::array<double, kNumTerms> coeffs{};
  std::array<double, kNumTerms * kNumTerms> xtx_inv{};
  double rss = 0.0;
};

LsFit least_squares(std::span<const NormalizedPoint> points,
                    std::span<const double> y,
                    const std::array<bool, kNumTerms>& active) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < kNumTerms; ++j) {
    if (active[j]) cols.push_back(j);
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto p = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = regressors(points[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < p; ++j) {
      X(i, j) = r[cols[static_cast<std::size_t>(j)]];
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::MatrixXd xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw NumericError("design degenerate (singular X'X)");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd a = qr.solve(b);
  const Eigen::MatrixXd inv = lu.inverse();

  LsFit fit;
  for (Eigen::Index j = 0; j < p; ++j) {
    fit.coeffs[cols[static_cast<std::size_t>(j)]] = a(j);
    for (Eigen::Index k = 0; k < p; ++k) {
      fit.xtx_inv[cols[static_cast<std::size_t>(j)] * kNumTerms +
                  cols[static_cast<std::size_t>(k)]] = inv(j, k);
    }
  }
  fit.rss = (X * a - b).squaredNorm();
  return fit;
}

}  // namespace

DoeRegion DoeRegion::centered(double dc_min, double dc_max, double std_min,
                              double std_max, int l_center) {
  DoeRegion r;
  r.dc_min = dc_min;
  r.dc_max = dc_max;
  r.std_min = std_min;
  r.std_max = std_max;
  r.dc_c = 0.5 * (dc_min + dc_max);
  r.std_c = 0.5 * (std_min + std_max);
  r.l_center = l_center;
  return r;
}

void DoeRegion::validate() const {
  if (!(dc_max > dc_min)) throw ConfigError("DOE region: dc_max <= dc_min");
  if (!(std_max > std_min)) throw ConfigError("DOE region: std_max <= std_min");
  if (std_min < 0.0) throw ConfigError("DOE region: std_min < 0");
  if (dc_c < dc_min || dc_c > dc_max || std_c < std_min || std_c > std_max) {
    throw ConfigError("DOE region: center outside the region");
  }
  if (l_center < 2) {
    throw ConfigError("DOE region: need at least 2 center replicates");
  }
}

NormalizedPoint normalize(const Setting& s, const DoeRegion& r) {
  return {(s.dc - r.dc_c) / ((r.dc_max - r.dc_min) / 2.0),
          (s.std - r.std_c) / ((r.std_max - r.std_min) / 2.0)};
}

Setting denormalize(const NormalizedPoint& x, const DoeRegion& r) {
  return {r.dc_c + x.x1 * (r.dc_max - r.dc_min) / 2.0,
          r.std_c + x.x2 * (r.std_max - r.std_min) / 2.0};
}

CcdPlan build_plan(const DoeRegion& region) {
  region.validate();
  const double a = std::numbers::sqrt2;
  CcdPlan plan;
  plan.region = region;
  plan.points = {{+1, -1}, {+1, +1}, {-1, -1}, {-1, +1},
                 {a, 0},   {-a, 0},  {0, a},   {0, -a}};
  for (int i = 0; i < region.l_center; ++i) plan.points.push_back({0, 0});
  for (const auto& x : plan.points) {
    const Setting s = denormalize(x, region);
    if (!(s.std > 0.0)) {
      throw ConfigError(fmt::format(
          "region too wide for axial points (std = {:.6g} at x = ({:.4f}, "
          "{:.4f}))",
          s.std, x.x1, x.x2));
    }
    plan.settings.push_back(s);
  }
  return plan;
}

std::string_view term_name(std::size_t term) {
  static constexpr std::string_view kNames[] = {"A20", "A11", "A02",
                                                "A10", "A01", "A00"};
  return term < kNumTerms ? kNames[term] : "?";
}

double QuadraticSurface::operator()(const NormalizedPoint& x) const {
  const auto r = regressors(x);
  double v = 0.0;
  for (std::size_t j = 0; j < kNumTerms; ++j) {
    if (active[j]) v += coeffs[j] * r[j];
  }
  return v;
}

std::array<double, 2> QuadraticSurface::gradient(
    const NormalizedPoint& x) const {
  auto c = [&](std::size_t j) { return active[j] ? coeffs[j] : 0.0; };
  return {2.0 * c(kA20) * x.x1 + c(kA11) * x.x2 + c(kA10),
          c(kA11) * x.x1 + 2.0 * c(kA02) * x.x2 + c(kA01)};
}

QuadraticSurface fit_surface(const CcdPlan& plan, std::span<const double> mses,
                             double t_threshold) {
  std::size_t centers = 0;
  for (const auto& x : plan.points) {
    if (x.x1 == 0.0 && x.x2 == 0.0) ++centers;
  }
  if (centers < 2) {
    throw ConfigError("surface fit needs at least 2 center replicates");
  }
  return fit_surface(plan.points, mses, t_threshold);
}

QuadraticSurface fit_surface(std::span<const NormalizedPoint> points,
                             std::span<const double> mses,
                             double t_threshold) {
  if (points.size() != mses.size()) {
    throw ConfigError("surface fit: one MSE per plan row is required");
  }
  if (points.size() < kNumTerms + 1) {
    throw ConfigError(fmt::format(
        "surface fit needs at least {} rows, got {}", kNumTerms + 1,
        points.size()));
  }
  double scale = 0.0;
  for (double m : mses) {
    if (!std::isfinite(m)) throw ConfigError("surface fit: non-finite MSE");
    scale = std::max(scale, std::abs(m));
  }

  QuadraticSurface s;
  s.active.fill(true);
  const double n = static_cast<double>(points.size());

  auto apply = [&](const LsFit& fit) {
    s.coeffs = fit.coeffs;
    s.rss = fit.rss;
    std::size_t p = 0;
    for (bool a : s.active) p += a ? 1 : 0;
    s.var_mse = fit.rss / (n - static_cast<double>(p));
    for (std::size_t i = 0; i < kNumTerms * kNumTerms; ++i) {
      s.covariance[i] = fit.xtx_inv[i] * s.var_mse;
    }
    s.rss_history.push_back(fit.rss);
    for (std::size_t j = 0; j < kNumTerms; ++j) {
      if (!s.active[j]) {
        s.t_values[j] = 0.0;
        continue;
      }
      const double sd = std::sqrt(s.covariance[j * kNumTerms + j]);
      if (sd > 0.0) {
        s.t_values[j] = s.coeffs[j] / sd;
      } else {
        s.t_values[j] = s.coeffs[j] == 0.0
                            ? 0.0
                            : std::copysign(
                                  std::numeric_limits<double>::infinity(),
                                  s.coeffs[j]);
      }
    }
  };

  apply(least_squares(points, mses, s.active));

  // Zero residual: t-values are meaningless, keep the coefficients that are
  // not rounding noise.
  if (std::sqrt(s.rss / n) <= 1e-12 * std::max(scale, 1e-300)) {
    s.exact_fit = true;
    double amax = 0.0;
    for (double c : s.coeffs) amax = std::max(amax, std::abs(c));
    bool changed = false;
    for (std::size_t j = 0; j < kA00; ++j) {
      if (std::abs(s.coeffs[j]) <= 1e-9 * amax) {
        s.active[j] = false;
        changed = true;
      }
    }
    if (changed) apply(least_squares(points, mses, s.active));
    for (std::size_t j = 0; j < kNumTerms; ++j) {
      if (!s.active[j]) s.coeffs[j] = 0.0;
    }
    return s;
  }

  while (true) {
    std::size_t worst = kNumTerms;
    double worst_t = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < kA00; ++j) {
      if (s.active[j] && std::abs(s.t_values[j]) < worst_t) {
        worst_t = std::abs(s.t_values[j]);
        worst = j;
      }
    }
    if (worst == kNumTerms || worst_t >= t_threshold) break;
    s.active[worst] = false;
    apply(least_squares(points, mses, s.active));
  }
  for (std::size_t j = 0; j < kNumTerms; ++j) {
    if (!s.active[j]) s.coeffs[j] = 0.0;
  }
  return s;
}

std::string_view extremum_kind_name(ExtremumKind kind) {
  switch (kind) {
    case ExtremumKind::kMinimum:
      return "minimum";
    case ExtremumKind::kMaximum:
      return "maximum";
    case ExtremumKind::kSaddle:
      return "saddle";
  }
  return "saddle";
}

Extremum extremum(const QuadraticSurface& surface) {
  const auto& c = surface.coeffs;
  const double h11 = 2.0 * c[kA20];
  const double h12 = c[kA11];
  const double h22 = 2.0 * c[kA02];
  const double det = h11 * h22 - h12 * h12;
  const double hmax = std::max({std::abs(h11), std::abs(h12), std::abs(h22)});
  if (hmax == 0.0 || std::abs(det) <= 1e-12 * hmax * hmax) {
    throw NumericError("degenerate surface: no isolated extremum");
  }
  Extremum e;
  // [h11 h12; h12 h22] x = -[A10; A01]
  e.x_star.x1 = -(h22 * c[kA10] - h12 * c[kA01]) / det;
  e.x_star.x2 = -(-h12 * c[kA10] + h11 * c[kA01]) / det;
  e.value = surface(e.x_star);
  const double tr = h11 + h22;
  if (det < 0.0) {
    e.kind = ExtremumKind::kSaddle;
  } else {
    e.kind = tr > 0.0 ? ExtremumKind::kMinimum : ExtremumKind::kMaximum;
  }
  return e;
}

EigenPath eigen_path(const QuadraticSurface& surface, const Extremum& ext,
                     const DoeRegion& region, int n_points) {
  region.validate();
  if (n_points < 1) throw ConfigError("eigen path: n_points must be >= 1");
  const auto& c = surface.coeffs;
  const double x1 = ext.x_star.x1;
  const double x2 = ext.x_star.x2;

  EigenPath path;
  path.x_star = ext.x_star;
  // Taylor expansion about x*: quadratic terms are unchanged, the linear
  // terms become the gradient at x* (zero up to rounding).
  const auto grad = surface.gradient(ext.x_star);
  path.recentred = {c[kA20], c[kA11], c[kA02], grad[0], grad[1],
                    surface({x1, x2})};

  Eigen::Matrix2d q;
  q << path.recentred[kA20], path.recentred[kA11] / 2.0,
      path.recentred[kA11] / 2.0, path.recentred[kA02];
  path.q_matrix = {q(0, 0), q(0, 1), q(1, 0), q(1, 1)};
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(q);
  const auto& ev = solver.eigenvalues();
  const auto& vec = solver.eigenvectors();
  for (int i = 0; i < 2; ++i) {
    path.eigenvalues[static_cast<std::size_t>(i)] = ev(i);
    path.eigenvectors[static_cast<std::size_t>(i)] = {vec(0, i), vec(1, i)};
  }
  const double a0 = std::abs(ev(0));
  const double a1 = std::abs(ev(1));
  if (std::abs(a0 - a1) <= 1e-9 * std::max(a0, a1)) {
    throw NumericError(fmt::format(
        "no preferred direction: |eigenvalues| equal ({:.6g}, {:.6g}), "
        "eigenvectors ({:.6f}, {:.6f}) and ({:.6f}, {:.6f})",
        ev(0), ev(1), vec(0, 0), vec(1, 0), vec(0, 1), vec(1, 1)));
  }
  const int pick = a0 < a1 ? 0 : 1;
  path.lambda_min = ev(pick);
  double d1 = vec(0, pick);
  double d2 = vec(1, pick);
  // Orientation: DC increasing along the path (STD increasing if DC is flat).
  if (d1 < 0.0 || (std::abs(d1) < 1e-15 && d2 < 0.0)) {
    d1 = -d1;
    d2 = -d2;
  }
  const double norm = std::hypot(d1, d2);
  path.direction = {d1 / norm, d2 / norm};

  // Segment of x* + t d inside the region box with std > 0.
  const NormalizedPoint lo = normalize({region.dc_min, region.std_min}, region);
  const NormalizedPoint hi = normalize({region.dc_max, region.std_max}, region);
  const double std_floor =
      normalize({0.0, std::max(region.std_min, 1e-12 * region.std_max)}, region)
          .x2;
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double start, double dir, double lower, double upper) {
    if (std::abs(dir) < 1e-15) {
      if (start < lower || start > upper) {
        t_lo = 1.0;
        t_hi = 0.0;
      }
      return;
    }
    double ta = (lower - start) / dir;
    double tb = (upper - start) / dir;
    if (ta > tb) std::swap(ta, tb);
    t_lo = std::max(t_lo, ta);
    t_hi = std::min(t_hi, tb);
  };
  clip(x1, path.direction[0], lo.x1, hi.x1);
  clip(x2, path.direction[1], std::max(lo.x2, std_floor), hi.x2);
  if (!(t_hi >= t_lo)) {
    throw NumericError(
        "eigen path does not cross the region: the line through the "
        "extremum misses the DC/STD box");
  }
  for (int i = 0; i < n_points; ++i) {
    const double t =
        n_points == 1 ? 0.5 * (t_lo + t_hi)
                      : t_lo + (t_hi - t_lo) * i / static_cast<double>(n_points - 1);
    const NormalizedPoint x{x1 + t * path.direction[0],
                            x2 + t * path.direction[1]};
    path.designed_normalized.push_back(x);
    path.designed_points.push_back(denormalize(x, region));
  }
  return path;
}

}  // namespace blalab
