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

#include "blalab/spectral.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "testing/oracles.h"

namespace blalab {
namespace {

TEST(Rfft, MatchesDirectDft) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (std::size_t n : {7u, 16u, 97u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = nd(rng);
    const auto X = rfft(x);
    ASSERT_EQ(X.size(), n / 2 + 1);
    for (std::size_t k = 0; k < X.size(); ++k) {
      EXPECT_LT(std::abs(X[k] - testing::dft_bin(x, k)), 1e-10) << n << " " << k;
    }
  }
}

TEST(Rfft, InverseRoundTrip) {
  std::vector<double> x = {1.0, -2.0, 0.5, 3.0, 0.25, -1.0, 2.0};
  const auto back = irfft(rfft(x), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
}

TEST(SpectrumAtBins, PicksRequestedBins) {
  const std::size_t n = 64;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 2.0 * std::cos(2.0 * std::numbers::pi * 5.0 * i / n + 0.3);
  }
  const std::vector<int> bins = {3, 5};
  const auto s = spectrum_at_bins(x, bins);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_LT(std::abs(s[0]), 1e-10);
  // A cosine of amplitude A puts A*N/2 in its positive bin.
  EXPECT_NEAR(std::abs(s[1]), 64.0, 1e-10);
  EXPECT_NEAR(std::arg(s[1]), 0.3, 1e-12);
}

TEST(Rms, KnownValues) {
  const std::vector<double> x = {3.0, -3.0, 3.0, -3.0};
  EXPECT_DOUBLE_EQ(rms(x), 3.0);
  EXPECT_DOUBLE_EQ(rms(std::vector<double>{}), 0.0);
}

}  // namespace
}  // namespace blalab
