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

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "procest/gmm.hpp"
#include "procest/regressor.hpp"

namespace procest {

/// A trained regressor together with the mixture it was trained against.
struct ModelBundle {
  ProgressRegressor regressor;
  PhaseGmm gmm;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Versioned JSON document: architecture, schema, mixture, and every weight
/// array flattened row-major with its shape. Doubles are written in their
/// shortest round-trip form, so parse(serialize(m)) restores m bit-exactly.
std::string serialize_model(const ModelBundle& bundle);
ModelBundle parse_model(std::string_view text);  // throws DataError

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

nlohmann::json gmm_to_json(const PhaseGmm& gmm);
PhaseGmm gmm_from_json(const nlohmann::json& j);

}  // namespace procest
