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

// Reference computations used by the tests. They are written independently of
// the library code they check: plain loops, no shared helpers.

#ifndef BLALAB_TESTS_TESTING_ORACLES_H_
#define BLALAB_TESTS_TESTING_ORACLES_H_

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace blalab::testing {

using Cplx = std::complex<double>;

// Horner evaluation of an ascending-power polynomial.
inline Cplx poly_at(const std::vector<double>& c, Cplx s) {
  Cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
  return acc;
}

inline Cplx tf_at_hz(const std::vector<double>& num,
                     const std::vector<double>& den, double f) {
  const Cplx s(0.0, 2.0 * std::numbers::pi * f);
  return poly_at(num, s) / poly_at(den, s);
}

// Gaussian Bussgang gain Cov(p, f(p)) / Var(p) estimated from `draws` samples
// of N(mu, sigma^2).
inline double monte_carlo_gain(const std::function<double(double)>& f,
                               double mu, double sigma, std::size_t draws,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(mu, sigma);
  // Welford-style running moments for stability.
  double mp = 0.0, mq = 0.0, cpp = 0.0, cpq = 0.0;
  for (std::size_t i = 1; i <= draws; ++i) {
    const double p = nd(rng);
    const double q = f(p);
    const double dp = p - mp;
    mp += dp / static_cast<double>(i);
    mq += (q - mq) / static_cast<double>(i);
    cpp += dp * (p - mp);
    cpq += dp * (q - mq);
  }
  return cpq / cpp;
}

// Direct DFT X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline Cplx dft_bin(const std::vector<double>& x, std::size_t k) {
  const double n = static_cast<double>(x.size());
  Cplx acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                       static_cast<double>(i) / n;
    acc += x[i] * Cplx(std::cos(ang), std::sin(ang));
  }
  return acc;
}

// Coefficients (ascending) of prod (s - r) for conjugate-closed roots.
inline std::vector<double> poly_from_roots(const std::vector<Cplx>& roots) {
  std::vector<Cplx> c{1.0};
  for (const auto& r : roots) {
    std::vector<Cplx> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = next;
  }
  std::vector<double> out;
  for (const auto& v : c) out.push_back(v.real());
  return out;
}

}  // namespace blalab::testing

#endif  // BLALAB_TESTS_TESTING_ORACLES_H_
