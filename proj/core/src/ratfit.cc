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

#include "blalab/ratfit.h"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "blalab/error.h"
#include "blalab/polynomial.h"

namespace blalab {
namespace {

constexpr double kRankTol = 1e-12;

struct Iterate {
  std::vector<double> num;  // scaled frequency variable
  std::vector<double> den;  // scaled, monic
  double wrms = std::numeric_limits<double>::infinity();
};

double weighted_rms(std::span<const Complex> sigma, std::span<const Complex> g,
                    std::span<const double> w, const Iterate& it) {
  double acc = 0.0;
  double wsum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Complex model =
        polyval<Complex>(it.num, sigma[k]) / polyval<Complex>(it.den, sigma[k]);
    acc += w[k] * std::norm(g[k] - model);
    wsum += w[k];
  }
  return std::sqrt(acc / wsum);
}

}  // namespace

void FitSpec::validate(std::size_t bins) const {
  if (num_order < 0 || den_order < num_order) {
    throw ConfigError(fmt::format(
        "fit orders must satisfy na >= nb >= 0 (na={}, nb={})", den_order,
        num_order));
  }
  if (bins < static_cast<std::size_t>(num_order + den_order + 2)) {
    throw ConfigError(fmt::format(
        "fit needs at least na + nb + 2 = {} bins, got {}",
        num_order + den_order + 2, bins));
  }
  if (!weights.empty() && weights.size() != bins) {
    throw ConfigError("fit weights do not match the number of bins");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("fit weights must be finite and nonnegative");
    }
  }
  if (max_iters < 1) throw ConfigError("fit max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw ConfigError("fit rel_tol must be positive");
}

Complex RationalModel::operator()(Complex s) const {
  return polyval<Complex>(num, s) / polyval<Complex>(den, s);
}

Complex RationalModel::at_hz(double f) const {
  return (*this)(Complex(0.0, 2.0 * std::numbers::pi * f));
}

RationalModel fit_rational(std::span<const double> freqs_hz,
                           std::span<const Complex> g, const FitSpec& spec) {
  const std::size_t K = freqs_hz.size();
  if (g.size() != K) throw ConfigError("fit: freqs and FRF sizes differ");
  spec.validate(K);
  for (std::size_t k = 1; k < K; ++k) {
    if (!(freqs_hz[k] > freqs_hz[k - 1])) {
      throw ConfigError("fit: frequencies must be strictly increasing");
    }
  }
  for (const auto& v : g) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ConfigError("fit: non-finite FRF value");
    }
  }

  std::vector<double> w(K, 1.0);
  if (!spec.weights.empty()) w = spec.weights;
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
    throw ConfigError("fit: all weights are zero");
  }

  double log_sum = 0.0;
  std::size_t positive = 0;
  for (double f : freqs_hz) {
    if (f > 0.0) {
      log_sum += std::log(2.0 * std::numbers::pi * f);
      ++positive;
    }
  }
  const double w_scale =
      positive > 0 ? std::exp(log_sum / static_cast<double>(positive)) : 1.0;
  std::vector<Complex> sigma(K);
  for (std::size_t k = 0; k < K; ++k) {
    sigma[k] = Complex(0.0, 2.0 * std::numbers::pi * freqs_hz[k] / w_scale);
  }

  const int nb = spec.num_order;
  const int na = spec.den_order;
  const int n_par = nb + 1 + na;
  const auto rows = static_cast<Eigen::Index>(2 * K);

  Iterate current;
  current.den.assign(static_cast<std::size_t>(na) + 1, 0.0);
  current.den.back() = 1.0;
  current.num.assign(static_cast<std::size_t>(nb) + 1, 0.0);
  Iterate best;
  Eigen::VectorXd theta_prev;
  bool converged = false;
  int iterations = 0;

  for (int iter = 0; iter < spec.max_iters; ++iter) {
    Eigen::MatrixXd A(rows, n_par);
    Eigen::VectorXd rhs(rows);
    for (std::size_t k = 0; k < K; ++k) {
      const double d_prev = std::abs(polyval<Complex>(current.den, sigma[k]));
      if (d_prev == 0.0 || !std::isfinite(d_prev)) {
        throw NumericError("fit: denominator vanished on the frequency grid");
      }
      const double sq = std::sqrt(w[k]) / d_prev;
      const auto r = static_cast<Eigen::Index>(2 * k);
      Complex sp(1.0, 0.0);
      for (int i = 0; i <= std::max(nb, na); ++i) {
        if (i <= nb) {
          A(r, i) = sq * sp.real();
          A(r + 1, i) = sq * sp.imag();
        }
        if (i < na) {
          const Complex c = -g[k] * sp;
          A(r, nb + 1 + i) = sq * c.real();
          A(r + 1, nb + 1 + i) = sq * c.imag();
        }
        sp *= sigma[k];
      }
      Complex target = g[k];
      for (int i = 0; i < na; ++i) target *= sigma[k];
      rhs(r) = sq * target.real();
      rhs(r + 1) = sq * target.imag();
    }

    Eigen::VectorXd col_norm = A.colwise().norm();
    for (Eigen::Index j = 0; j < n_par; ++j) {
      if (!(col_norm(j) > 0.0)) {
        throw NumericError("unidentifiable orders (empty regressor column)");
      }
      A.col(j) /= col_norm(j);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(kRankTol);
    if (qr.rank() < n_par) {
      throw NumericError(fmt::format(
          "unidentifiable orders (rank {} < {} parameters for na={}, nb={})",
          qr.rank(), n_par, na, nb));
    }
    Eigen::VectorXd theta = qr.solve(rhs).cwiseQuotient(col_norm);

    for (int i = 0; i <= nb; ++i) {
      current.num[static_cast<std::size_t>(i)] = theta(i);
    }
    for (int i = 0; i < na; ++i) {
      current.den[static_cast<std::size_t>(i)] = theta(nb + 1 + i);
    }
    current.wrms = weighted_rms(sigma, g, w, current);
    if (std::isfinite(current.wrms) && current.wrms < best.wrms) {
      best = current;
    }
    iterations = iter + 1;

    if (theta_prev.size() == n_par) {
      const double change = (theta - theta_prev).norm();
      if (change <= spec.rel_tol * std::max(theta.norm(), 1e-300)) {
        converged = true;
        break;
      }
    }
    theta_prev = theta;
  }

  const Iterate& chosen = converged ? current : best;
  if (chosen.num.empty()) throw NumericError("fit produced no finite iterate");

  RationalModel model;
  model.converged = converged;
  model.iterations = iterations;

  // Back to the physical frequency variable: s = w_scale * sigma. Multiplying
  // numerator and denominator by w_scale^na keeps the denominator monic.
  model.num.resize(chosen.num.size());
  model.den.resize(chosen.den.size());
  for (std::size_t i = 0; i < chosen.num.size(); ++i) {
    model.num[i] = chosen.num[i] *
                   std::pow(w_scale, static_cast<double>(na) - static_cast<double>(i));
  }
  for (std::size_t i = 0; i < chosen.den.size(); ++i) {
    model.den[i] = chosen.den[i] *
                   std::pow(w_scale, static_cast<double>(na) - static_cast<double>(i));
  }

  for (const auto& r : poly_roots(chosen.den)) model.poles.push_back(r * w_scale);
  if (poly_degree(chosen.num) > 0) {
    for (const auto& r : poly_roots(chosen.num)) {
      model.zeros.push_back(r * w_scale);
    }
  }
  sort_roots(model.poles);
  sort_roots(model.zeros);
  model.stable = std::all_of(model.poles.begin(), model.poles.end(),
                             [](const Complex& p) { return p.real() < 0.0; });

  model.residuals.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    model.residuals[k] = g[k] - polyval<Complex>(chosen.num, sigma[k]) /
                                    polyval<Complex>(chosen.den, sigma[k]);
  }
  model.weighted_rms_residual = chosen.wrms;
  return model;
}

std::vector<double> weight_from_variance(const BlaEstimate& est) {
  const std::size_t K = est.var_total.size();
  std::vector<double> sorted(est.var_total);
  std::sort(sorted.begin(), sorted.end());
  double median = 0.0;
  if (K > 0) {
    median = K % 2 == 1 ? sorted[K / 2]
                        : 0.5 * (sorted[K / 2 - 1] + sorted[K / 2]);
  }
  const double floor = 1e-12 * median;
  // Variances below what rounding of G_bla itself produces carry no
  // information; left alone they would make noiseless weights random.
  constexpr double kResolution = 64.0 * std::numeric_limits<double>::epsilon();
  std::vector<double> w(K, 1.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double g2 = k < est.g_bla.size() ? std::norm(est.g_bla[k]) : 0.0;
    const double resolution = kResolution * kResolution * g2;
    if (floor > 0.0) {
      w[k] = 1.0 / std::max({est.var_total[k], floor, resolution});
    }
    if (k < est.ill_conditioned.size() && est.ill_conditioned[k]) w[k] = 0.0;
  }
  return w;
}

}  // namespace blalab
