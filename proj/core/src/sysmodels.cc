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

#include "blalab/sysmodels.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "blalab/error.h"
#include "blalab/polynomial.h"
#include "blalab/spectral.h"

namespace blalab {
namespace {

constexpr double kSteadyStateTol = 1e-6;
constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonMaxIters = 50;
constexpr double kBlowUpNorm = 1e6;

// Steady-state response of one period.
std::vector<double> lti_period(const LtiSystem& sys,
                               std::span<const double> period, double fs) {
  const std::size_t n = period.size();
  auto spectrum = rfft(period);
  double peak = 0.0;
  for (const auto& x : spectrum) peak = std::max(peak, std::abs(x));
  const double occupied = peak * 1e-13;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (std::abs(spectrum[k]) <= occupied) {
      spectrum[k] = 0.0;
      continue;
    }
    const double w = 2.0 * std::numbers::pi * fs * static_cast<double>(k) /
                     static_cast<double>(n);
    const Complex s(0.0, w);
    const Complex den = polyval<Complex>(sys.den, s);
    double scale = 0.0;
    double wp = 1.0;
    for (double c : sys.den) {
      scale += std::abs(c) * wp;
      wp *= w;
    }
    if (std::abs(den) <= 1e-12 * scale) {
      throw NumericError(
          fmt::format("pole on excitation grid (bin {}, {} Hz)", k,
                      fs * static_cast<double>(k) / static_cast<double>(n)));
    }
    spectrum[k] *= polyval<Complex>(sys.num, s) / den;
  }
  return irfft(spectrum, n);
}

std::vector<double> tile(std::span<const double> period, std::size_t count) {
  std::vector<double> out(period.size() * count);
  for (std::size_t p = 0; p < count; ++p) {
    std::copy(period.begin(), period.end(), out.begin() + p * period.size());
  }
  return out;
}

std::size_t output_periods(const SignalRealization& u,
                           const SimOptions& options) {
  if (options.transient_periods < 0) {
    throw ConfigError("transient_periods must be >= 0");
  }
  const auto t = static_cast<std::size_t>(options.transient_periods);
  if (u.periods() < t + 1) {
    throw ConfigError(
        fmt::format("input has {} periods, need at least transient ({}) + 1",
                    u.periods(), t));
  }
  return u.periods() - t;
}

double relative_rms_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

// Drives a period-by-period simulator until `keep` consecutive periods agree
// with their predecessors to kSteadyStateTol. The first `transient` periods
// are always discarded.
template <typename StepPeriod>
std::vector<double> run_to_steady_state(StepPeriod&& step_period,
                                        int transient, std::size_t keep,
                                        int max_extra) {
  struct Entry {
    std::vector<double> y;
    double diff;
  };
  std::vector<double> prev;
  for (int t = 0; t < transient; ++t) prev = step_period();

  std::deque<Entry> window;
  std::vector<double> history;  // diffs of the evicted periods
  int extra = 0;
  while (true) {
    auto cur = step_period();
    const double d = prev.empty() ? 0.0 : relative_rms_diff(prev, cur);
    if (!std::isfinite(d)) {
      throw NumericError("loop diverged (non-finite response)");
    }
    prev = cur;
    window.push_back({std::move(cur), d});
    if (window.size() > keep) {
      history.push_back(window.front().diff);
      window.pop_front();
      ++extra;
    }
    if (window.size() == keep &&
        std::all_of(window.begin(), window.end(), [](const Entry& e) {
          return e.diff <= kSteadyStateTol;
        })) {
      break;
    }
    if (extra > max_extra) {
      throw NumericError(fmt::format(
          "loop diverged (response not periodic after {} periods, last "
          "period-to-period rms difference {:.3g})",
          transient + static_cast<int>(keep) + extra, d));
    }
    // Not decreasing over ten periods: the loop oscillates or drifts.
    if (history.size() > 10 && d > 0.99 * history[history.size() - 10]) {
      throw NumericError(fmt::format(
          "loop diverged (period-to-period rms difference not decreasing, "
          "{:.3g})",
          d));
    }
  }
  std::vector<double> out;
  out.reserve(keep * window.front().y.size());
  for (const auto& e : window) out.insert(out.end(), e.y.begin(), e.y.end());
  return out;
}

}  // namespace

Complex LtiSystem::operator()(Complex s) const {
  return polyval<Complex>(num, s) / polyval<Complex>(den, s);
}

Complex LtiSystem::at_hz(double f) const {
  return (*this)(Complex(0.0, 2.0 * std::numbers::pi * f));
}

void LtiSystem::validate() const {
  if (den.empty() || den.back() == 0.0) {
    throw ConfigError("LTI block: denominator leading coefficient is zero");
  }
  if (num.empty() || poly_degree(num) < 0) {
    throw ConfigError("LTI block: numerator is zero");
  }
  if (poly_degree(num) > poly_degree(den)) {
    throw ConfigError("LTI block: improper transfer function");
  }
  for (double c : num) {
    if (!std::isfinite(c)) throw ConfigError("LTI block: non-finite numerator");
  }
  for (double c : den) {
    if (!std::isfinite(c)) {
      throw ConfigError("LTI block: non-finite denominator");
    }
  }
}

LtiSystem series(const LtiSystem& a, const LtiSystem& b) {
  return {poly_multiply(a.num, b.num), poly_multiply(a.den, b.den)};
}

double StaticNl::operator()(double p) const {
  return polyval<double>(coeffs, p);
}

double StaticNl::derivative(double p) const {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 1;) {
    acc = acc * p + static_cast<double>(i) * coeffs[i];
  }
  return acc;
}

void StaticNl::validate() const {
  if (coeffs.empty()) throw ConfigError("static nonlinearity has no terms");
  if (poly_degree(coeffs) > kMaxDegree) {
    throw ConfigError(fmt::format(
        "static nonlinearity degree exceeds {}", kMaxDegree));
  }
  for (double c : coeffs) {
    if (!std::isfinite(c)) {
      throw ConfigError("static nonlinearity has non-finite coefficient");
    }
  }
}

NlMsdParams NlMsdParams::defaults() {
  const double w0 = 2.0 * std::numbers::pi * 70.0;
  NlMsdParams p;
  p.m = 1.0;
  p.d = 2.0 * 0.05 * w0;
  p.k1 = w0 * w0;
  p.k3 = 0.0;

  const double fs = 2440.0;
  const double n = 4883.0;
  const auto harmonics = harmonic_grid(3, 2, 399);
  const LtiSystem g = p.linear_part();
  double sum = 0.0;
  for (int k : harmonics) sum += std::norm(g.at_hz(k * fs / n));
  const double std_r = 0.110;
  const double var_y = std_r * std_r * sum / static_cast<double>(harmonics.size());
  p.k3 = 0.1 * p.k1 / var_y;
  return p;
}

LtiSystem NlMsdParams::linear_part() const { return {{1.0}, {k1, d, m}}; }

void NlMsdParams::validate() const {
  if (!(m > 0.0)) throw ConfigError("NL-MSD: mass must be positive");
  if (!std::isfinite(d) || !std::isfinite(k1) || !std::isfinite(k3)) {
    throw ConfigError("NL-MSD: non-finite parameter");
  }
}

NlXfbParams NlXfbParams::defaults() {
  const double w0 = 2.0 * std::numbers::pi * 300.0;
  const double q = 2.0;
  const double wc = 2.0 * std::numbers::pi * 20.0;
  NlXfbParams p;
  // Zero at s = 0 gives the antiresonance at DC.
  p.forward = {{0.0, w0 / q}, {w0 * w0, w0 / q, 1.0}};
  p.lowpass = {{wc * wc}, {wc * wc, 2.0 * 0.7 * wc, 1.0}};
  p.gain = 5.0;
  return p;
}

void NlXfbParams::validate() const {
  forward.validate();
  lowpass.validate();
  if (!std::isfinite(gain)) throw ConfigError("NL-XFB: non-finite gain");
}

BilinearFilter::BilinearFilter(const LtiSystem& sys, double dt) {
  sys.validate();
  const std::size_t order = sys.den.size() - 1;
  const double c = 2.0 / dt;
  const std::vector<double> minus{1.0, -1.0};
  const std::vector<double> plus{1.0, 1.0};
  auto power = [](const std::vector<double>& base, std::size_t e) {
    std::vector<double> out{1.0};
    for (std::size_t i = 0; i < e; ++i) out = poly_multiply(out, base);
    return out;
  };
  auto transform = [&](std::span<const double> coeffs) {
    std::vector<double> out(order + 1, 0.0);
    double ci = 1.0;
    for (std::size_t i = 0; i <= order; ++i, ci *= c) {
      const double coef = i < coeffs.size() ? coeffs[i] : 0.0;
      if (coef == 0.0) continue;
      const auto term =
          poly_multiply(power(minus, i), power(plus, order - i));
      for (std::size_t j = 0; j < term.size(); ++j) {
        out[j] += coef * ci * term[j];
      }
    }
    return out;
  };
  b_ = transform(sys.num);
  a_ = transform(sys.den);
  const double a0 = a_[0];
  if (a0 == 0.0) throw NumericError("bilinear transform: singular a0");
  for (double& v : b_) v /= a0;
  for (double& v : a_) v /= a0;
  s_.assign(order, 0.0);
}

void BilinearFilter::commit(double x, double y) {
  const std::size_t n = s_.size();
  for (std::size_t i = 0; i < n; ++i) {
    s_[i] = b_[i + 1] * x - a_[i + 1] * y + (i + 1 < n ? s_[i + 1] : 0.0);
  }
}

std::vector<double> lti_response(const LtiSystem& sys,
                                 std::span<const double> x,
                                 std::size_t period_length, double fs) {
  sys.validate();
  if (period_length == 0 || x.size() % period_length != 0 || x.empty()) {
    throw ConfigError("lti_response: input is not a whole number of periods");
  }
  const auto first = x.subspan(0, period_length);
  for (std::size_t off = period_length; off < x.size(); off += period_length) {
    if (!std::equal(first.begin(), first.end(), x.begin() + off)) {
      throw ConfigError("lti_response: input is not periodic");
    }
  }
  return tile(lti_period(sys, first, fs), x.size() / period_length);
}

std::vector<double> lti_response(const LtiSystem& sys,
                                 const SignalRealization& u) {
  return lti_response(sys, u.samples(), u.spec().n_samples, u.spec().fs);
}

namespace {

std::vector<double> wh_period(const WienerHammerstein& wh,
                              std::span<const double> u, double fs) {
  wh.front.validate();
  wh.back.validate();
  wh.nl.validate();
  auto p = lti_period(wh.front, u, fs);
  for (double& v : p) v = wh.nl(v);
  return lti_period(wh.back, p, fs);
}

std::vector<double> simulate_feedback(const NlFeedback& fb,
                                      const SignalRealization& u,
                                      const SimOptions& options,
                                      std::size_t keep) {
  fb.nl.validate();
  if (options.oversample < 1) throw ConfigError("oversample must be >= 1");
  const auto os = static_cast<std::size_t>(options.oversample);
  const std::size_t n = u.spec().n_samples;
  const double dt = 1.0 / (u.spec().fs * static_cast<double>(os));
  const auto u_fine = u.oversampled_period(options.oversample);

  BilinearFilter forward(fb.forward, dt);
  BilinearFilter fb_front(fb.fb_front, dt);
  BilinearFilter fb_back(fb.fb_back, dt);
  const double loop_b0 =
      forward.feedthrough() * fb_front.feedthrough() * fb_back.feedthrough();
  double y = 0.0;

  auto step_period = [&]() {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n * os; ++i) {
      const double ui = u_fine[i];
      // Newton on F(y) = y - forward(u - fb_back(nl(fb_front(y)))).
      bool converged = false;
      for (int it = 0; it < kNewtonMaxIters; ++it) {
        const double p = fb_front.peek(y);
        const double z = fb_back.peek(fb.nl(p));
        const double r = y - forward.peek(ui - z);
        const double dr = 1.0 + loop_b0 * fb.nl.derivative(p);
        if (dr == 0.0 || !std::isfinite(dr) || !std::isfinite(r)) break;
        const double dy = r / dr;
        y -= dy;
        if (std::abs(dy) <= kNewtonTol * (1.0 + std::abs(y))) {
          converged = true;
          break;
        }
      }
      if (!converged || !std::isfinite(y)) {
        throw NumericError(
            "loop diverged (Newton iteration on the algebraic loop failed)");
      }
      const double p = fb_front.peek(y);
      const double q = fb.nl(p);
      const double z = fb_back.peek(q);
      const double e = ui - z;
      fb_front.commit(y, p);
      fb_back.commit(q, z);
      forward.commit(e, y);
      if (i % os == 0) out[i / os] = y;
    }
    return out;
  };
  return run_to_steady_state(step_period, options.transient_periods, keep,
                             options.max_settle_periods);
}

}  // namespace

std::vector<double> simulate_block_model(const BlockModel& model,
                                         const SignalRealization& u,
                                         const SimOptions& options) {
  const std::size_t keep = output_periods(u, options);
  const double fs = u.spec().fs;
  const auto period = u.period(0);
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WienerHammerstein>) {
          return tile(wh_period(m, period, fs), keep);
        } else if constexpr (std::is_same_v<T, ParallelWH>) {
          if (m.branches.empty()) {
            throw ConfigError("parallel Wiener-Hammerstein without branches");
          }
          std::vector<double> sum(period.size(), 0.0);
          for (const auto& branch : m.branches) {
            const auto y = wh_period(branch, period, fs);
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += y[i];
          }
          return tile(sum, keep);
        } else {
          return simulate_feedback(m, u, options, keep);
        }
      },
      model);
}

std::vector<double> simulate_nl_msd(const NlMsdParams& params,
                                    const SignalRealization& r,
                                    const SimOptions& options) {
  params.validate();
  if (options.oversample < 4) {
    throw ConfigError("NL-MSD: oversample must be >= 4");
  }
  const std::size_t keep = output_periods(r, options);
  const auto os = static_cast<std::size_t>(options.oversample);
  const std::size_t n = r.spec().n_samples;
  const double h = 1.0 / (r.spec().fs * static_cast<double>(os));
  // Input on a half-step grid so that RK4 midpoints are exact samples.
  const auto r_half = r.oversampled_period(2 * options.oversample);
  const std::size_t steps = n * os;

  const double inv_m = 1.0 / params.m;
  auto accel = [&](double y, double v, double force) {
    return (force - params.d * v - params.k1 * y - params.k3 * y * y * y) *
           inv_m;
  };

  double y = 0.0;
  double v = 0.0;
  auto step_period = [&]() {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < steps; ++i) {
      if (i % os == 0) out[i / os] = y;
      const double f0 = r_half[2 * i];
      const double fm = r_half[2 * i + 1];
      const double f1 = r_half[(2 * i + 2) % r_half.size()];
      const double k1y = v;
      const double k1v = accel(y, v, f0);
      const double k2y = v + 0.5 * h * k1v;
      const double k2v = accel(y + 0.5 * h * k1y, v + 0.5 * h * k1v, fm);
      const double k3y = v + 0.5 * h * k2v;
      const double k3v = accel(y + 0.5 * h * k2y, v + 0.5 * h * k2v, fm);
      const double k4y = v + h * k3v;
      const double k4v = accel(y + h * k3y, v + h * k3v, f1);
      y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      if (!(std::abs(y) + std::abs(v) <= kBlowUpNorm)) {
        throw NumericError("integration blew up");
      }
    }
    return out;
  };
  return run_to_steady_state(step_period, options.transient_periods, keep,
                             options.max_settle_periods);
}

std::vector<double> simulate_nl_xfb(const NlXfbParams& params,
                                    const SignalRealization& u,
                                    const SimOptions& options) {
  params.validate();
  if (options.oversample < 1) throw ConfigError("oversample must be >= 1");
  const std::size_t keep = output_periods(u, options);
  const auto os = static_cast<std::size_t>(options.oversample);
  const std::size_t n = u.spec().n_samples;
  const double fs_fine = u.spec().fs * static_cast<double>(os);
  const auto u_fine = u.oversampled_period(options.oversample);
  std::vector<double> squared(u_fine.size());
  for (std::size_t i = 0; i < u_fine.size(); ++i) {
    squared[i] = u_fine[i] * u_fine[i];
  }
  // The multiplier's side input depends on u only, so it is exact.
  const auto w = lti_period(params.lowpass, squared, fs_fine);

  BilinearFilter forward(params.forward, 1.0 / fs_fine);
  const double b0 = forward.feedthrough();
  auto step_period = [&]() {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n * os; ++i) {
      const double loop = params.gain * w[i];
      const double denom = 1.0 + b0 * loop;
      if (denom == 0.0) throw NumericError("loop diverged (singular loop)");
      // y = b0 (u - loop y) + s  =>  y (1 + b0 loop) = b0 u + s.
      const double y = forward.peek(u_fine[i]) / denom;
      const double e = u_fine[i] - loop * y;
      forward.commit(e, y);
      if (i % os == 0) out[i / os] = y;
    }
    return out;
  };
  return run_to_steady_state(step_period, options.transient_periods, keep,
                             options.max_settle_periods);
}

std::vector<double> add_noise(std::span<const double> y, double noise_std,
                              std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  std::vector<double> out(y.begin(), y.end());
  if (noise_std == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  for (double& v : out) v += noise(rng);
  return out;
}

}  // namespace blalab
