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

// Continuous-time rational fit of a measured frequency response,
//
//   G(s) ~ N(s) / D(s),  deg N = nb, deg D = na, D monic,
//
// by Sanathanan-Koerner iterations: iteration i solves the linear weighted
// least squares problem
//
//   min sum_k w_k / |D_{i-1}(j w_k)|^2 |N(j w_k) - G_k D(j w_k)|^2
//
// with real coefficients (real and imaginary parts stacked). The frequency
// axis is scaled by the geometric mean of the band for conditioning.

#ifndef BLALAB_RATFIT_H_
#define BLALAB_RATFIT_H_

#include <complex>
#include <span>
#include <vector>

#include "blalab/bla_robust.h"

namespace blalab {

using Complex = std::complex<double>;

struct FitSpec {
  int num_order = 0;  // nb
  int den_order = 0;  // na
  // Per-bin nonnegative weights; empty means uniform.
  std::vector<double> weights;
  int max_iters = 100;
  double rel_tol = 1e-12;

  void validate(std::size_t bins) const;
};

struct RationalModel {
  std::vector<double> num;  // ascending powers of s
  std::vector<double> den;  // ascending, monic
  std::vector<Complex> poles;
  std::vector<Complex> zeros;
  double weighted_rms_residual = 0.0;
  std::vector<Complex> residuals;  // G_k - N/D at each bin
  bool converged = false;
  int iterations = 0;
  bool stable = true;  // all poles in the open left half plane

  Complex operator()(Complex s) const;
  Complex at_hz(double f) const;
};

RationalModel fit_rational(std::span<const double> freqs_hz,
                           std::span<const Complex> g, const FitSpec& spec);

// w_k = 1 / max(var_total_k, 1e-12 median(var_total), (64 eps |G_k|)^2); zero
// on bins flagged ill-conditioned. If every variance is zero the weights are
// uniform.
std::vector<double> weight_from_variance(const BlaEstimate& est);

}  // namespace blalab

#endif  // BLALAB_RATFIT_H_
