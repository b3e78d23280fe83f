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

// Simulators for block-oriented nonlinear systems driven by periodic
// multisines.
//
// Open-loop structures (Wiener-Hammerstein, parallel Wiener-Hammerstein) are
// evaluated exactly in steady state: LTI blocks are applied bin by bin on the
// DFT of one period and static nonlinearities pointwise on the samples.
// Closed-loop structures are integrated in the time domain on an oversampled
// grid and run until the response is periodic.

#ifndef BLALAB_SYSMODELS_H_
#define BLALAB_SYSMODELS_H_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "blalab/signal_gen.h"

namespace blalab {

using Complex = std::complex<double>;

// G(s) = N(s) / D(s), coefficients in ascending powers of s.
struct LtiSystem {
  std::vector<double> num{1.0};
  std::vector<double> den{1.0};

  static LtiSystem gain(double k) { return {{k}, {1.0}}; }

  Complex operator()(Complex s) const;
  Complex at_hz(double f) const;

  // Nonzero leading denominator coefficient, deg N <= deg D.
  void validate() const;
};

LtiSystem series(const LtiSystem& a, const LtiSystem& b);

// Memoryless polynomial q = sum c_i p^i, degree <= 9.
struct StaticNl {
  static constexpr int kMaxDegree = 9;

  std::vector<double> coeffs{0.0, 1.0};

  static StaticNl identity() { return {}; }

  double operator()(double p) const;
  double derivative(double p) const;
  void validate() const;
};

struct WienerHammerstein {
  LtiSystem front;
  StaticNl nl;
  LtiSystem back;
};

struct ParallelWH {
  std::vector<WienerHammerstein> branches;
};

// y = forward(u - z), z = fb_back(nl(fb_front(y))).
struct NlFeedback {
  LtiSystem forward;
  LtiSystem fb_front;
  StaticNl nl;
  LtiSystem fb_back;
};

using BlockModel = std::variant<WienerHammerstein, ParallelWH, NlFeedback>;

// m y'' + d y' + k1 y + k3 y^3 = r(t).
struct NlMsdParams {
  double m = 1.0;
  double d = 0.0;
  double k1 = 1.0;
  double k3 = 0.0;

  // Resonance at 70 Hz with 5 % damping, and a cubic stiffness such that
  // k3 sigma_y^2 / k1 = 0.1 when the linear part is driven by a 110 mV
  // flat multisine on harmonics 3:2:399 of fs = 2440 Hz, N = 4883.
  static NlMsdParams defaults();

  // Underlying linear dynamics 1 / (m s^2 + d s + k1).
  LtiSystem linear_part() const;
  void validate() const;
};

// Bandpass forward path whose output is fed back through a multiplier; the
// multiplier's other input is the lowpass-filtered square of the excitation:
//
//   y = forward(u - gain * w * y),  w = lowpass(u^2).
struct NlXfbParams {
  LtiSystem forward;
  LtiSystem lowpass;
  double gain = 1.0;

  static NlXfbParams defaults();
  void validate() const;
};

struct SimOptions {
  int oversample = 10;
  int transient_periods = 1;
  // Closed loops: maximum number of extra periods spent waiting for the
  // response to become periodic.
  int max_settle_periods = 60;
};

// Exact periodic steady state of an LTI block: Y[k] = G(j w_k) U[k] on every
// DFT bin. `x` must consist of whole, identical periods of length
// `period_length`.
std::vector<double> lti_response(const LtiSystem& sys,
                                 std::span<const double> x,
                                 std::size_t period_length, double fs);
std::vector<double> lti_response(const LtiSystem& sys,
                                 const SignalRealization& u);

// Returns (u.periods() - transient_periods) periods of output.
std::vector<double> simulate_block_model(const BlockModel& model,
                                         const SignalRealization& u,
                                         const SimOptions& options = {});

std::vector<double> simulate_nl_msd(const NlMsdParams& params,
                                    const SignalRealization& r,
                                    const SimOptions& options = {});

std::vector<double> simulate_nl_xfb(const NlXfbParams& params,
                                    const SignalRealization& u,
                                    const SimOptions& options = {});

// i.i.d. zero-mean Gaussian noise. Deterministic per seed.
std::vector<double> add_noise(std::span<const double> y, double noise_std,
                              std::uint64_t seed);

// Discrete-time counterpart of an LTI block by the bilinear transform at
// sampling interval `dt`, run sample by sample in transposed direct form II.
class BilinearFilter {
 public:
  BilinearFilter(const LtiSystem& sys, double dt);

  double feedthrough() const { return b_[0]; }
  // Output for input x without advancing the state.
  double peek(double x) const { return b_[0] * x + (s_.empty() ? 0.0 : s_[0]); }
  // Advance the state with the (x, y) pair of the current step.
  void commit(double x, double y);
  double step(double x) {
    const double y = peek(x);
    commit(x, y);
    return y;
  }

  std::span<const double> b() const { return b_; }
  std::span<const double> a() const { return a_; }

 private:
  std::vector<double> b_, a_, s_;
};

}  // namespace blalab

#endif  // BLALAB_SYSMODELS_H_
