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

// Robust-method estimate of the Best Linear Approximation.
//
// The system is measured with M random-phase realizations of P steady-state
// periods each. Averaging over periods of one realization isolates the noise
// (it changes from period to period while the nonlinear distortion repeats);
// scatter between realizations adds the stochastic nonlinear distortion. With
// U^[m,p], Y^[m,p] the DFT of period p of realization m at excited bin k:
//
//   U^[m] = mean_p U^[m,p]                    Y^[m] likewise
//   s2_U[m] = sum_p |U^[m,p] - U^[m]|^2 / (P (P-1))      (Y, YU likewise)
//   G^[m] = Y^[m] / U^[m]
//   G_bla = mean_m G^[m]
//   var_total = sum_m |G^[m] - G_bla|^2 / (M (M-1))
//   s2_{U,n} = mean_m s2_U[m]                  (Y, YU likewise)
//   S_UU = mean_m (|U^[m]|^2 - s2_{U,n})       S_YY likewise
//   S_YU = mean_m (Y^[m] conj(U^[m]) - s2_{YU,n})
//   var_noise = |G_bla|^2 / M * (s2_{Y,n}/S_YY + s2_{U,n}/S_UU
//                                - 2 Re(s2_{YU,n}/S_YU))
//   var_stoch_nl = M (var_total - var_noise)

#ifndef BLALAB_BLA_ROBUST_H_
#define BLALAB_BLA_ROBUST_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "blalab/signal_gen.h"

namespace blalab {

using Complex = std::complex<double>;

struct RecordMeta {
  double dc = 0.0;
  double std = 0.0;
  double fs = 1.0;
  std::size_t n_samples = 0;
  std::vector<int> excited_harmonics;
  std::vector<std::uint64_t> seeds;  // one per realization
};

// Input/output spectra at the excited bins, M realizations x P periods.
class ExperimentRecord {
 public:
  ExperimentRecord() = default;
  ExperimentRecord(std::size_t realizations, std::size_t periods,
                   RecordMeta meta);

  std::size_t realizations() const { return m_; }
  std::size_t periods() const { return p_; }
  std::size_t bins() const { return meta_.excited_harmonics.size(); }
  const RecordMeta& meta() const { return meta_; }
  std::vector<double> freqs() const;

  Complex& u(std::size_t m, std::size_t p, std::size_t k) {
    return u_[index(m, p, k)];
  }
  Complex& y(std::size_t m, std::size_t p, std::size_t k) {
    return y_[index(m, p, k)];
  }
  const Complex& u(std::size_t m, std::size_t p, std::size_t k) const {
    return u_[index(m, p, k)];
  }
  const Complex& y(std::size_t m, std::size_t p, std::size_t k) const {
    return y_[index(m, p, k)];
  }

  // Stores the spectra of realization m from steady-state time records of
  // P * N samples each.
  void set_realization(std::size_t m, std::span<const double> u_time,
                       std::span<const double> y_time);

  // New record made of the given realizations (repetitions allowed).
  ExperimentRecord select(std::span<const std::size_t> realizations) const;

  // M >= 2, P >= 2, bins consistent. Throws ConfigError.
  void validate() const;

 private:
  std::size_t index(std::size_t m, std::size_t p, std::size_t k) const {
    return (m * p_ + p) * bins() + k;
  }

  std::size_t m_ = 0;
  std::size_t p_ = 0;
  RecordMeta meta_;
  std::vector<Complex> u_;
  std::vector<Complex> y_;
};

struct BlaEstimate {
  std::size_t realizations = 0;  // M
  std::size_t periods = 0;       // P
  std::vector<double> freqs;     // Hz

  std::vector<Complex> g_bla;
  std::vector<double> var_total;
  std::vector<double> var_noise;
  std::vector<double> var_stoch_nl;  // raw, may be negative
  std::vector<double> var_stoch_nl_clamped;

  // Per-realization averages, indexed [m * bins + k].
  std::vector<Complex> u_mean;
  std::vector<Complex> y_mean;
  std::vector<Complex> g_real;

  std::vector<double> noise_u;   // s2_{U,n}
  std::vector<double> noise_y;   // s2_{Y,n}
  std::vector<Complex> noise_yu; // s2_{YU,n}
  std::vector<double> s_uu;
  std::vector<double> s_yy;
  std::vector<Complex> s_yu;

  // Bins where a noise-corrected power falls below 1e-12 of its band median;
  // the noise variance there is unreliable.
  std::vector<bool> ill_conditioned;

  std::size_t bins() const { return g_bla.size(); }
};

BlaEstimate estimate_bla(const ExperimentRecord& rec);

// Band-averaged total distortion: trapezoid integral of var_total over the
// excited frequencies divided by the band width.
double mse_of_bla(const BlaEstimate& est);

}  // namespace blalab

#endif  // BLALAB_BLA_ROBUST_H_
