// Copyright 2026 The posekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "posekit/eval3d.h"
#include "posekit/geometry.h"
#include "posekit/priors.h"
#include "posekit/quantizer.h"
#include "posekit/vocab_grammar.h"

namespace posekit {
namespace {

std::vector<double> NormalSamples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> s(n);
  for (double& x : s) x = g(rng);
  return s;
}

QuantizerSet BenchQuantizers() {
  FitSamples s;
  s.trans_xy = NormalSamples(100000, 1);
  s.trans_z = NormalSamples(100000, 2);
  for (double& z : s.trans_z) z = std::abs(z) + 0.1;
  s.size = NormalSamples(100000, 3);
  for (double& z : s.size) z = std::abs(z) + 0.01;
  return FitQuantizerSet(s);
}

Eigen::Quaterniond RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q;
}

void BM_FitQuantileBins(benchmark::State& state) {
  const std::vector<double> s =
      NormalSamples(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(FitQuantileBins(TokenFamily::kTransXy, s, 1024));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitQuantileBins)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_EncodeValue(benchmark::State& state) {
  const std::vector<double> s = NormalSamples(4096, 5);
  const BinTable t = FitQuantileBins(TokenFamily::kTransXy, s, 1024);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(EncodeValue(t, s[i++ & 4095]));
  }
}
BENCHMARK(BM_EncodeValue);

void BM_SerializeParseTrajectory(benchmark::State& state) {
  const QuantizerSet q = BenchQuantizers();
  const Vocab v = BuildVocab();
  std::mt19937_64 rng(6);
  Trajectory tr;
  for (int k = 0; k < 16; ++k) {
    tr.waypoints.push_back(Se3Pose({0.1 * k, -0.1 * k, 1.0 + 0.05 * k},
                                   RandomRotation(rng)));
  }
  for (auto _ : state) {
    const std::vector<TokenId> ids = SerializeTrajectory(tr, v, q);
    benchmark::DoNotOptimize(ParseSequence(ids, v, q));
  }
}
BENCHMARK(BM_SerializeParseTrajectory);

void BM_IouExact(benchmark::State& state) {
  const OrientedBox3D a({0, 0, 0}, {1, 2, 1},
                        Eigen::Quaterniond(Eigen::AngleAxisd(
                            0.3, Eigen::Vector3d::UnitZ())));
  const OrientedBox3D b({0.4, 0.2, 0.1}, {1.5, 1, 1},
                        Eigen::Quaterniond(Eigen::AngleAxisd(
                            -0.7, Eigen::Vector3d::UnitZ())));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Iou3d(a, b, IouMethod::kExactYaw));
  }
}
BENCHMARK(BM_IouExact);

void BM_IouMonteCarlo(benchmark::State& state) {
  const OrientedBox3D a({0, 0, 0}, {1, 2, 1}, Eigen::Quaterniond::Identity());
  const OrientedBox3D b({0.4, 0.2, 0.1}, {1.5, 1, 1},
                        Eigen::Quaterniond(Eigen::AngleAxisd(
                            0.5, Eigen::Vector3d::UnitX())));
  MonteCarloOptions mc;
  mc.samples = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Iou3d(a, b, IouMethod::kMonteCarlo, mc));
  }
}
BENCHMARK(BM_IouMonteCarlo)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

void BM_RaymapPatchify(benchmark::State& state) {
  const CameraIntrinsics k(200, 200, 112, 112, 224, 224);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Patchify(Raymap(k), 14));
  }
}
BENCHMARK(BM_RaymapPatchify)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace posekit

BENCHMARK_MAIN();
