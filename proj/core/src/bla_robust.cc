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

#include "blalab/bla_robust.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "blalab/error.h"
#include "blalab/spectral.h"

namespace blalab {
namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), mid));
  }
  return m;
}

}  // namespace

ExperimentRecord::ExperimentRecord(std::size_t realizations,
                                   std::size_t periods, RecordMeta meta)
    : m_(realizations), p_(periods), meta_(std::move(meta)) {
  u_.assign(m_ * p_ * bins(), Complex(0.0, 0.0));
  y_.assign(m_ * p_ * bins(), Complex(0.0, 0.0));
}

std::vector<double> ExperimentRecord::freqs() const {
  std::vector<double> f;
  f.reserve(bins());
  const double f0 = meta_.fs / static_cast<double>(meta_.n_samples);
  for (int k : meta_.excited_harmonics) f.push_back(k * f0);
  return f;
}

void ExperimentRecord::set_realization(std::size_t m,
                                       std::span<const double> u_time,
                                       std::span<const double> y_time) {
  const std::size_t n = meta_.n_samples;
  if (m >= m_) throw ConfigError("realization index out of range");
  if (u_time.size() != n * p_ || y_time.size() != n * p_) {
    throw ConfigError(fmt::format(
        "realization {}: expected {} samples ({} periods of {}), got u={} "
        "y={}",
        m, n * p_, p_, n, u_time.size(), y_time.size()));
  }
  for (std::size_t p = 0; p < p_; ++p) {
    const auto us = spectrum_at_bins(u_time.subspan(p * n, n),
                                     meta_.excited_harmonics);
    const auto ys = spectrum_at_bins(y_time.subspan(p * n, n),
                                     meta_.excited_harmonics);
    std::copy(us.begin(), us.end(), u_.begin() + index(m, p, 0));
    std::copy(ys.begin(), ys.end(), y_.begin() + index(m, p, 0));
  }
}

ExperimentRecord ExperimentRecord::select(
    std::span<const std::size_t> realizations) const {
  RecordMeta meta = meta_;
  meta.seeds.clear();
  ExperimentRecord out(realizations.size(), p_, std::move(meta));
  for (std::size_t i = 0; i < realizations.size(); ++i) {
    const std::size_t src = realizations[i];
    if (src >= m_) throw ConfigError("select: realization out of range");
    if (src < meta_.seeds.size()) out.meta_.seeds.push_back(meta_.seeds[src]);
    std::copy_n(u_.begin() + index(src, 0, 0), p_ * bins(),
                out.u_.begin() + out.index(i, 0, 0));
    std::copy_n(y_.begin() + index(src, 0, 0), p_ * bins(),
                out.y_.begin() + out.index(i, 0, 0));
  }
  return out;
}

void ExperimentRecord::validate() const {
  if (m_ < 2) {
    throw ConfigError(fmt::format(
        "dimension error: robust method needs M >= 2 realizations, got {}",
        m_));
  }
  if (p_ < 2) {
    throw ConfigError(fmt::format(
        "dimension error: robust method needs P >= 2 periods, got {}", p_));
  }
  if (bins() == 0) throw ConfigError("dimension error: no excited bins");
  if (u_.size() != m_ * p_ * bins() || y_.size() != u_.size()) {
    throw ConfigError("dimension error: spectra size mismatch");
  }
}

BlaEstimate estimate_bla(const ExperimentRecord& rec) {
  rec.validate();
  const std::size_t M = rec.realizations();
  const std::size_t P = rec.periods();
  const std::size_t K = rec.bins();
  const double dM = static_cast<double>(M);
  const double dP = static_cast<double>(P);

  BlaEstimate est;
  est.realizations = M;
  est.periods = P;
  est.freqs = rec.freqs();
  est.u_mean.assign(M * K, 0.0);
  est.y_mean.assign(M * K, 0.0);
  est.g_real.assign(M * K, 0.0);
  est.g_bla.assign(K, 0.0);
  est.var_total.assign(K, 0.0);
  est.noise_u.assign(K, 0.0);
  est.noise_y.assign(K, 0.0);
  est.noise_yu.assign(K, 0.0);

  // Rounding noise of an N-point DFT of a constant signal stays far below
  // this.
  const double unexcited = 1e-12 * static_cast<double>(rec.meta().n_samples) *
                           (std::abs(rec.meta().dc) + rec.meta().std);

  // Per-realization period averages and within-realization variances.
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      Complex us(0.0), ys(0.0);
      for (std::size_t p = 0; p < P; ++p) {
        us += rec.u(m, p, k);
        ys += rec.y(m, p, k);
      }
      const Complex um = us / dP;
      const Complex ym = ys / dP;
      double su = 0.0, sy = 0.0;
      Complex syu(0.0);
      for (std::size_t p = 0; p < P; ++p) {
        const Complex du = rec.u(m, p, k) - um;
        const Complex dy = rec.y(m, p, k) - ym;
        su += std::norm(du);
        sy += std::norm(dy);
        syu += dy * std::conj(du);
      }
      const double norm = dP * (dP - 1.0);
      est.noise_u[k] += su / norm / dM;
      est.noise_y[k] += sy / norm / dM;
      est.noise_yu[k] += syu / norm / dM;

      if (std::abs(um) <= unexcited || !std::isfinite(std::abs(um))) {
        throw NumericError(fmt::format(
            "unexcited bin in record (realization {}, harmonic {})", m,
            rec.meta().excited_harmonics[k]));
      }
      est.u_mean[m * K + k] = um;
      est.y_mean[m * K + k] = ym;
      est.g_real[m * K + k] = ym / um;
      est.g_bla[k] += ym / um / dM;
    }
  }

  est.s_uu.assign(K, 0.0);
  est.s_yy.assign(K, 0.0);
  est.s_yu.assign(K, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t k = 0; k < K; ++k) {
      const Complex um = est.u_mean[m * K + k];
      const Complex ym = est.y_mean[m * K + k];
      est.var_total[k] +=
          std::norm(est.g_real[m * K + k] - est.g_bla[k]) / (dM * (dM - 1.0));
      est.s_uu[k] += (std::norm(um) - est.noise_u[k]) / dM;
      est.s_yy[k] += (std::norm(ym) - est.noise_y[k]) / dM;
      est.s_yu[k] += (ym * std::conj(um) - est.noise_yu[k]) / dM;
    }
  }

  std::vector<double> abs_yu(K);
  for (std::size_t k = 0; k < K; ++k) abs_yu[k] = std::abs(est.s_yu[k]);
  const double med_uu = median(est.s_uu);
  const double med_yy = median(est.s_yy);
  const double med_yu = median(abs_yu);

  est.var_noise.assign(K, 0.0);
  est.var_stoch_nl.assign(K, 0.0);
  est.var_stoch_nl_clamped.assign(K, 0.0);
  est.ill_conditioned.assign(K, false);
  for (std::size_t k = 0; k < K; ++k) {
    const bool ill = est.s_uu[k] < 1e-12 * med_uu ||
                     est.s_yy[k] < 1e-12 * med_yy ||
                     abs_yu[k] < 1e-12 * med_yu;
    // Terms with a zero numerator contribute nothing even when their
    // denominator vanishes (noiseless signals).
    auto ratio = [](auto num, auto den) -> decltype(num / den) {
      using R = decltype(num / den);
      return num == decltype(num)(0) ? R(0) : num / den;
    };
    double v = std::norm(est.g_bla[k]) / dM *
               (ratio(est.noise_y[k], est.s_yy[k]) +
                ratio(est.noise_u[k], est.s_uu[k]) -
                2.0 * std::real(ratio(est.noise_yu[k], est.s_yu[k])));
    if (!std::isfinite(v) || v < 0.0) {
      v = std::isfinite(v) ? 0.0 : v;
      est.ill_conditioned[k] = true;
    }
    est.ill_conditioned[k] = est.ill_conditioned[k] || ill;
    est.var_noise[k] = v;
    est.var_stoch_nl[k] = dM * (est.var_total[k] - v);
    est.var_stoch_nl_clamped[k] = std::max(est.var_stoch_nl[k], 0.0);
  }
  return est;
}

double mse_of_bla(const BlaEstimate& est) {
  const std::size_t K = est.bins();
  if (K < 2 || est.freqs.size() != K || est.var_total.size() != K) {
    throw ConfigError("mse_of_bla: need at least two excited bins");
  }
  const double band = est.freqs.back() - est.freqs.front();
  if (!(band > 0.0)) throw ConfigError("mse_of_bla: empty frequency band");
  double integral = 0.0;
  for (std::size_t k = 1; k < K; ++k) {
    integral += 0.5 * (est.var_total[k] + est.var_total[k - 1]) *
                (est.freqs[k] - est.freqs[k - 1]);
  }
  return integral / band;
}

}  // namespace blalab
