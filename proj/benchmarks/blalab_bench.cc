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

// Micro benchmarks of the stages that dominate a pipeline run.

#include <benchmark/benchmark.h>

#include <numbers>

#include "blalab/bla_robust.h"
#include "blalab/ccd_doe.h"
#include "blalab/parallel.h"
#include "blalab/ratfit.h"
#include "blalab/signal_gen.h"
#include "blalab/spectral.h"
#include "blalab/structdetect.h"
#include "blalab/sysmodels.h"

namespace blalab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MultisineSpec msd_spec(std::uint64_t seed) {
  MultisineSpec s;
  s.n_samples = 4883;
  s.fs = 2440.0;
  s.excited_harmonics = harmonic_grid(3, 2, 399);
  s.std = 0.05;
  s.seed = seed;
  return s;
}

FitSpec orders(int nb, int na) {
  FitSpec s;
  s.num_order = nb;
  s.den_order = na;
  return s;
}

LtiSystem first_order(double f_hz) {
  const double a = kTwoPi * f_hz;
  return {{a}, {a, 1.0}};
}

const WienerHammerstein kWh{first_order(200.0), StaticNl{{0.0, 1.0, 0.0, 0.5}},
                            first_order(70.0)};

ExperimentRecord wh_record(std::size_t m_count) {
  RecordMeta meta;
  meta.fs = 2440.0;
  meta.n_samples = 4883;
  meta.std = 0.05;
  meta.excited_harmonics = msd_spec(0).excited_harmonics;
  ExperimentRecord rec(m_count, 2, meta);
  for (std::size_t m = 0; m < m_count; ++m) {
    const auto u = realize_multisine(msd_spec(derive_seed(1, m)), 2);
    const auto y = add_noise(simulate_block_model(kWh, u, {.transient_periods = 0}),
                             1e-4, derive_seed(1, m, 1));
    rec.set_realization(m, u.samples(), y);
  }
  return rec;
}

void BM_Rfft(benchmark::State& state) {
  const auto u = realize_multisine(msd_spec(1), 1);
  const auto x = u.period(0);
  for (auto _ : state) benchmark::DoNotOptimize(rfft(x));
}
BENCHMARK(BM_Rfft);

void BM_RealizeMultisine(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(realize_multisine(msd_spec(++seed), 2));
  }
}
BENCHMARK(BM_RealizeMultisine);

void BM_SimulateWienerHammerstein(benchmark::State& state) {
  const auto u = realize_multisine(msd_spec(2), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_block_model(kWh, u, {.transient_periods = 0}));
  }
}
BENCHMARK(BM_SimulateWienerHammerstein);

void BM_SimulateNlMsd(benchmark::State& state) {
  const auto r = realize_multisine(msd_spec(3), 2);
  const auto p = NlMsdParams::defaults();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_nl_msd(p, r));
}
BENCHMARK(BM_SimulateNlMsd)->Unit(benchmark::kMillisecond);

void BM_EstimateBla(benchmark::State& state) {
  const auto rec = wh_record(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_bla(rec));
}
BENCHMARK(BM_EstimateBla)->Arg(8)->Arg(64);

void BM_FitRational(benchmark::State& state) {
  const auto est = estimate_bla(wh_record(8));
  FitSpec spec = orders(0, static_cast<int>(state.range(0)));
  spec.weights = weight_from_variance(est);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_rational(est.freqs, est.g_bla, spec));
  }
}
BENCHMARK(BM_FitRational)->Arg(2)->Arg(4);

void BM_Bootstrap(benchmark::State& state) {
  const auto rec = wh_record(8);
  const FitSpec spec = orders(0, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bootstrap_root_uncertainty(
        rec, spec, 20, 7, BootstrapWeights::kFromVariance));
  }
}
BENCHMARK(BM_Bootstrap)->Unit(benchmark::kMillisecond);

void BM_SurfaceToPath(benchmark::State& state) {
  const auto region = DoeRegion::centered(0.0, 0.1, 0.01, 0.05);
  const auto plan = build_plan(region);
  std::vector<double> mses;
  for (const auto& x : plan.points) {
    mses.push_back(2 * x.x1 * x.x1 + 0.5 * x.x1 * x.x2 + x.x2 * x.x2 +
                   0.1 * x.x1 + 3 + 1e-3 * std::sin(7 * x.x2 + x.x1));
  }
  for (auto _ : state) {
    const auto s = fit_surface(plan, mses);
    const auto e = extremum(s);
    benchmark::DoNotOptimize(eigen_path(s, e, region));
  }
}
BENCHMARK(BM_SurfaceToPath);

}  // namespace
}  // namespace blalab

BENCHMARK_MAIN();
