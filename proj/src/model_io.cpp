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

#include "procest/model_io.hpp"

#include <fstream>
#include <sstream>

#include "procest/config.hpp"
#include "procest/error.hpp"

namespace procest {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

template <typename M>
json matrix_to_json(const std::string& name, const M& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"name", name}, {"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
}

template <typename M>
void matrix_from_json(const json& arrays, const std::string& name, M& m) {
  const auto it = std::find_if(arrays.begin(), arrays.end(),
                               [&](const json& a) { return a.at("name") == name; });
  if (it == arrays.end()) throw DataError("model file: missing parameter '" + name + "'");
  const auto shape = it->at("shape").template get<std::vector<Eigen::Index>>();
  if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
    throw DataError("model file: parameter '" + name + "' has the wrong shape");
  }
  const auto& data = it->at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.rows() * m.cols()) {
    throw DataError("model file: parameter '" + name + "' has the wrong size");
  }
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[k++].template get<double>();
  }
  if (!m.allFinite()) throw DataError("model file: parameter '" + name + "' is not finite");
}

template <typename Fn>
void for_each_array(ProgressRegressor& r, Fn&& fn) {
  for (std::size_t l = 0; l < r.encoder.size(); ++l) {
    fn("encoder." + std::to_string(l) + ".W", r.encoder[l].W);
    fn("encoder." + std::to_string(l) + ".b", r.encoder[l].b);
  }
  fn("lstm.Wx", r.lstm.Wx);
  fn("lstm.Wh", r.lstm.Wh);
  fn("lstm.b", r.lstm.b);
  fn("fc1.W", r.fc1.W);
  fn("fc1.b", r.fc1.b);
  fn("fc2.W", r.fc2.W);
  fn("fc2.b", r.fc2.b);
  fn("out.W", r.out.W);
  fn("out.b", r.out.b);
}

}  // namespace

json gmm_to_json(const PhaseGmm& gmm) {
  return json{{"schema", gmm.schema},   {"weights", gmm.weights}, {"means", gmm.means},
              {"stds", gmm.stds},       {"eps0", gmm.eps0},       {"eps1", gmm.eps1}};
}

PhaseGmm gmm_from_json(const json& j) {
  PhaseGmm g;
  try {
    g.schema = j.at("schema").get<PhaseSchema>();
    g.weights = j.at("weights").get<std::vector<double>>();
    g.means = j.at("means").get<std::vector<double>>();
    g.stds = j.at("stds").get<std::vector<double>>();
    g.eps0 = j.at("eps0").get<double>();
    g.eps1 = j.at("eps1").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("phase mixture: ") + e.what());
  }
  g.validate();
  return g;
}

std::string serialize_model(const ModelBundle& bundle) {
  json arrays = json::array();
  for_each_array(const_cast<ProgressRegressor&>(bundle.regressor),
                 [&](const std::string& name, const auto& m) {
                   arrays.push_back(matrix_to_json(name, m));
                 });
  json doc = {{"format", "procest-model"},
              {"version", kModelVersion},
              {"architecture", bundle.regressor.config()},
              {"gmm", gmm_to_json(bundle.gmm)},
              {"parameters", std::move(arrays)},
              {"metadata", bundle.metadata}};
  return doc.dump();
}

ModelBundle parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  ModelBundle bundle;
  try {
    if (doc.at("format") != "procest-model") throw DataError("model file: unknown format");
    if (doc.at("version").get<int>() != kModelVersion) {
      throw DataError("model file: unsupported version");
    }
    RegressorConfig config;
    doc.at("architecture").get_to(config);
    config.validate();
    bundle.regressor = ProgressRegressor::zeros(config);
    const json& arrays = doc.at("parameters");
    for_each_array(bundle.regressor, [&](const std::string& name, auto& m) {
      matrix_from_json(arrays, name, m);
    });
    bundle.gmm = gmm_from_json(doc.at("gmm"));
    bundle.metadata = doc.value("metadata", json::object());
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  return bundle;
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write model file '" + path.string() + "'");
  out << serialize_model(bundle) << '\n';
  if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace procest
