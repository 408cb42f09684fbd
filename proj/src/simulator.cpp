// Copyright 2026 The procest Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "procest/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstdio>
#include <random>

#include "procest/error.hpp"

namespace procest {

namespace {

constexpr double kTruncationFraction = 0.2;
constexpr std::uint32_t kEmissionSalt = 0x5eed'e311u;
constexpr std::uint32_t kTraceSalt = 0x7ace'0001u;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t salt, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    salt, static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double draw_duration(std::mt19937_64& rng, double mean, double stddev) {
  if (stddev == 0.0) return mean;
  std::normal_distribution<double> normal(mean, stddev);
  for (;;) {
    const double d = normal(rng);
    if (d >= kTruncationFraction * mean) return d;
  }
}

}  // namespace

SimulatorConfig SimulatorConfig::with_defaults(int num_phases, int feature_dim,
                                               std::uint64_t seed, int num_traces) {
  static constexpr std::array<double, 6> kInterior = {30.0, 45.0, 60.0, 40.0, 50.0, 35.0};
  SimulatorConfig c;
  c.seed = seed;
  c.num_traces = num_traces;
  c.num_phases = num_phases;
  c.feature_dim = feature_dim;
  c.boundary_start = c.boundary_end = num_phases >= 3;
  for (int k = 0; k < std::max(num_phases, 0); ++k) {
    if (c.boundary_start && k == 0) {
      c.phase_duration_means.push_back(5.0);
      c.phase_duration_stds.push_back(1.0);
    } else if (c.boundary_end && k == num_phases - 1) {
      c.phase_duration_means.push_back(2.0);
      c.phase_duration_stds.push_back(0.0);
    } else {
      const double mean = kInterior[static_cast<std::size_t>(k) % kInterior.size()];
      c.phase_duration_means.push_back(mean);
      c.phase_duration_stds.push_back(0.15 * mean);
    }
  }
  return c;
}

SimulatorConfig SimulatorConfig::resuscitation_like(std::uint64_t seed, int num_traces,
                                                    int feature_dim) {
  SimulatorConfig c;
  c.seed = seed;
  c.num_traces = num_traces;
  c.num_phases = 6;
  c.feature_dim = feature_dim;
  c.phase_names = {"pre_arrival",    "patient_arrival", "primary_survey",
                   "secondary_survey", "post_secondary", "patient_leave"};
  c.phase_duration_means = {90.0, 120.0, 240.0, 900.0, 1200.0, 1.0};
  c.phase_duration_stds = {20.0, 30.0, 60.0, 200.0, 300.0, 0.0};
  return c;
}

void SimulatorConfig::validate() const {
  const auto k = static_cast<std::size_t>(std::max(num_phases, 0));
  if (num_phases < 2) throw UsageError("simulator needs at least 2 phases");
  if (feature_dim < 1) throw UsageError("feature_dim must be >= 1");
  if (num_traces < 1) throw UsageError("num_traces must be >= 1");
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw UsageError("frame_rate must be positive");
  }
  if (phase_duration_means.size() != k || phase_duration_stds.size() != k) {
    throw UsageError("need one duration mean and std per phase");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(phase_duration_means[i] > 0.0) || !std::isfinite(phase_duration_means[i])) {
      throw UsageError("phase duration means must be positive");
    }
    if (!(phase_duration_stds[i] >= 0.0) || !std::isfinite(phase_duration_stds[i])) {
      throw UsageError("phase duration stds must be non-negative");
    }
  }
  if (!(emission_separation >= 0.0) || !(noise_std >= 0.0)) {
    throw UsageError("emission_separation and noise_std must be non-negative");
  }
  if (!phase_names.empty() && phase_names.size() != k) {
    throw UsageError("phase_names must name every phase");
  }
  try {
    schema().validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
}

PhaseSchema SimulatorConfig::schema() const {
  PhaseSchema s;
  s.boundary_start = boundary_start;
  s.boundary_end = boundary_end;
  if (!phase_names.empty()) {
    s.phases = phase_names;
  } else {
    for (int k = 0; k < num_phases; ++k) s.phases.push_back("phase_" + std::to_string(k));
  }
  return s;
}

Eigen::MatrixXd phase_emission_means(const SimulatorConfig& config) {
  const Eigen::Index f = config.feature_dim;
  const Eigen::Index k = config.num_phases;
  auto rng = make_rng(config.seed, kEmissionSalt, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd raw(f, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < f; ++i) raw(i, j) = normal(rng);
  }
  if (k <= f) {
    // Orthonormal directions scaled by s/sqrt(2) are pairwise s apart.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(f, k);
    return q * (config.emission_separation / std::sqrt(2.0));
  }
  double min_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      min_dist = std::min(min_dist, (raw.col(a) - raw.col(b)).norm());
    }
  }
  return raw * (config.emission_separation / min_dist);
}

std::vector<ProcessTrace> generate_dataset(const SimulatorConfig& config) {
  config.validate();
  const Eigen::MatrixXd means = phase_emission_means(config);
  const PhaseSchema schema = config.schema();
  std::vector<ProcessTrace> traces;
  traces.reserve(static_cast<std::size_t>(config.num_traces));

  for (int n = 0; n < config.num_traces; ++n) {
    auto rng = make_rng(config.seed, kTraceSalt, static_cast<std::uint64_t>(n));
    ProcessTrace trace;
    char id[32];
    std::snprintf(id, sizeof id, "case_%04d", n);
    trace.id = id;
    trace.schema = schema;

    std::vector<Eigen::Index> frames_per_phase;
    Eigen::Index total = 0;
    for (int k = 0; k < config.num_phases; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const double d = draw_duration(rng, config.phase_duration_means[ku],
                                     config.phase_duration_stds[ku]);
      const auto frames = std::max<Eigen::Index>(1, std::llround(d * config.frame_rate));
      trace.phase_marks.push_back({k, total});
      frames_per_phase.push_back(frames);
      total += frames;
    }

    trace.features.resize(config.feature_dim, total);
    trace.timestamps.resize(static_cast<std::size_t>(total));
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::Index i = 0;
    for (int k = 0; k < config.num_phases; ++k) {
      for (Eigen::Index j = 0; j < frames_per_phase[static_cast<std::size_t>(k)]; ++j, ++i) {
        trace.timestamps[static_cast<std::size_t>(i)] = static_cast<double>(i) / config.frame_rate;
        for (Eigen::Index d = 0; d < config.feature_dim; ++d) {
          const double eps = config.noise_std > 0.0 ? config.noise_std * noise(rng) : 0.0;
          trace.features(d, i) = means(d, k) + eps;
        }
      }
    }
    trace.duration_s = trace.timestamps.back() - trace.timestamps.front();
    traces.push_back(std::move(trace));
  }
  return traces;
}

std::vector<double> phase_durations(const ProcessTrace& trace, double frame_rate) {
  std::vector<double> out(static_cast<std::size_t>(trace.schema.size()), 0.0);
  for (std::size_t m = 0; m < trace.phase_marks.size(); ++m) {
    const auto end = m + 1 < trace.phase_marks.size() ? trace.phase_marks[m + 1].frame
                                                     : trace.num_frames();
    out[static_cast<std::size_t>(trace.phase_marks[m].phase)] =
        static_cast<double>(end - trace.phase_marks[m].frame) / frame_rate;
  }
  return out;
}

}  // namespace procest
