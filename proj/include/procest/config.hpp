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

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "procest/gmm.hpp"
#include "procest/objective.hpp"
#include "procest/regressor.hpp"
#include "procest/simulator.hpp"
#include "procest/trainer.hpp"

namespace procest {

/// Everything needed to reproduce a run. Serialized next to every output.
struct RunConfig {
  std::uint64_t seed = 7;
  SimulatorConfig simulator = SimulatorConfig::with_defaults(6);
  RegressorConfig model;
  TrainConfig train;
  GmmFitOptions gmm{GmmVariance::kTied, 0.005, 0.005, true};
  double test_fraction = 0.2;
  double rho_min = 0.01;
  int threads = 0;  // 0: PROCEST_THREADS or hardware concurrency
};

void to_json(nlohmann::json& j, const SimulatorConfig& c);
void from_json(const nlohmann::json& j, SimulatorConfig& c);
void to_json(nlohmann::json& j, const RegressorConfig& c);
void from_json(const nlohmann::json& j, RegressorConfig& c);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
void to_json(nlohmann::json& j, const GmmFitOptions& c);
void from_json(const nlohmann::json& j, GmmFitOptions& c);
void to_json(nlohmann::json& j, const PhaseSchema& s);
void from_json(const nlohmann::json& j, PhaseSchema& s);
void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

/// Reads a JSON document; throws UsageError when unreadable or malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `doc` with 2-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace procest
