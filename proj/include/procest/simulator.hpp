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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "procest/trace.hpp"

namespace procest {

/// Synthetic linear-process generator settings. Durations are in seconds.
struct SimulatorConfig {
  std::uint64_t seed = 7;
  int num_traces = 60;
  int num_phases = 6;
  int feature_dim = 16;
  double frame_rate = 1.0;
  std::vector<double> phase_duration_means;
  std::vector<double> phase_duration_stds;
  double emission_separation = 2.0;
  double noise_std = 0.5;
  bool boundary_start = true;
  bool boundary_end = true;
  std::vector<std::string> phase_names;  // empty: phase_0, phase_1, ...

  /// Default durations for `num_phases` phases: a short pre-start phase, a
  /// one-or-two frame end signal, and interior phases of 30-60 s with 15%
  /// spread. Boundary phases are only used when num_phases >= 3.
  static SimulatorConfig with_defaults(int num_phases, int feature_dim = 16,
                                       std::uint64_t seed = 7, int num_traces = 60);

  /// Six phases shaped like a trauma resuscitation (pre-arrival through
  /// patient-leave), on the order of 40 minutes per enactment at 1 fps.
  static SimulatorConfig resuscitation_like(std::uint64_t seed, int num_traces,
                                            int feature_dim = 16);

  /// Throws UsageError on an inconsistent configuration.
  void validate() const;

  [[nodiscard]] PhaseSchema schema() const;
};

/// Per-phase emission means, one column per phase, pairwise `separation`
/// apart when num_phases <= feature_dim (minimum pairwise distance otherwise).
Eigen::MatrixXd phase_emission_means(const SimulatorConfig& config);

/// Deterministic in `config`; trace i depends only on (seed, i).
std::vector<ProcessTrace> generate_dataset(const SimulatorConfig& config);

/// Duration of every phase of a trace in seconds, from its phase marks.
std::vector<double> phase_durations(const ProcessTrace& trace, double frame_rate);

}  // namespace procest
