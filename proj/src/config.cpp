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

#include "procest/config.hpp"

#include <fstream>
#include <sstream>

#include "procest/error.hpp"

namespace procest {

using nlohmann::json;

void to_json(json& j, const SimulatorConfig& c) {
  j = json{{"seed", c.seed},
           {"num_traces", c.num_traces},
           {"num_phases", c.num_phases},
           {"feature_dim", c.feature_dim},
           {"frame_rate", c.frame_rate},
           {"phase_duration_means", c.phase_duration_means},
           {"phase_duration_stds", c.phase_duration_stds},
           {"emission_separation", c.emission_separation},
           {"noise_std", c.noise_std},
           {"boundary_start", c.boundary_start},
           {"boundary_end", c.boundary_end},
           {"phase_names", c.phase_names}};
}

void from_json(const json& j, SimulatorConfig& c) {
  const int k = j.value("num_phases", c.num_phases);
  if (k != c.num_phases) {
    const SimulatorConfig d = SimulatorConfig::with_defaults(k, c.feature_dim, c.seed, c.num_traces);
    c.num_phases = k;
    c.phase_duration_means = d.phase_duration_means;
    c.phase_duration_stds = d.phase_duration_stds;
    c.boundary_start = d.boundary_start;
    c.boundary_end = d.boundary_end;
  }
  c.seed = j.value("seed", c.seed);
  c.num_traces = j.value("num_traces", c.num_traces);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.frame_rate = j.value("frame_rate", c.frame_rate);
  c.phase_duration_means = j.value("phase_duration_means", c.phase_duration_means);
  c.phase_duration_stds = j.value("phase_duration_stds", c.phase_duration_stds);
  c.emission_separation = j.value("emission_separation", c.emission_separation);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.boundary_start = j.value("boundary_start", c.boundary_start);
  c.boundary_end = j.value("boundary_end", c.boundary_end);
  c.phase_names = j.value("phase_names", c.phase_names);
}

void to_json(json& j, const RegressorConfig& c) {
  j = json{{"feature_dim", c.feature_dim},
           {"encoder_dim", c.encoder_dim},
           {"encoder_layers", c.encoder_layers},
           {"lstm_hidden", c.lstm_hidden},
           {"fc1_dim", c.fc1_dim},
           {"fc2_dim", c.fc2_dim},
           {"output", std::string(nn::to_string(c.output))},
           {"smooth_sigma", c.smooth_sigma},
           {"smooth_radius", c.smooth_radius},
           {"output_bias_init", c.output_bias_init}};
}

void from_json(const json& j, RegressorConfig& c) {
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.encoder_dim = j.value("encoder_dim", c.encoder_dim);
  c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
  c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
  c.fc1_dim = j.value("fc1_dim", c.fc1_dim);
  c.fc2_dim = j.value("fc2_dim", c.fc2_dim);
  c.output = nn::parse_activation(j.value("output", std::string(nn::to_string(c.output))));
  c.smooth_sigma = j.value("smooth_sigma", c.smooth_sigma);
  c.smooth_radius = j.value("smooth_radius", c.smooth_radius);
  c.output_bias_init = j.value("output_bias_init", c.output_bias_init);
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"curriculum_start_cases", c.curriculum_start_cases},
           {"curriculum_loss_threshold", c.curriculum_loss_threshold},
           {"early_stop_patience", c.early_stop_patience},
           {"early_stop_delta", c.early_stop_delta},
           {"max_epochs", c.max_epochs},
           {"bptt_window", c.bptt_window},
           {"dropout_rate", c.dropout_rate},
           {"seed", c.seed},
           {"learning_rate", c.adam.learning_rate},
           {"decay", c.adam.decay},
           {"beta1", c.adam.beta1},
           {"beta2", c.adam.beta2},
           {"epsilon", c.adam.epsilon},
           {"alpha", c.weights.alpha},
           {"beta", c.weights.beta}};
}

void from_json(const json& j, TrainConfig& c) {
  c.curriculum_start_cases = j.value("curriculum_start_cases", c.curriculum_start_cases);
  c.curriculum_loss_threshold = j.value("curriculum_loss_threshold", c.curriculum_loss_threshold);
  c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
  c.early_stop_delta = j.value("early_stop_delta", c.early_stop_delta);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.bptt_window = j.value("bptt_window", c.bptt_window);
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.seed = j.value("seed", c.seed);
  c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
  c.adam.decay = j.value("decay", c.adam.decay);
  c.adam.beta1 = j.value("beta1", c.adam.beta1);
  c.adam.beta2 = j.value("beta2", c.adam.beta2);
  c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
  c.weights.alpha = j.value("alpha", c.weights.alpha);
  c.weights.beta = j.value("beta", c.weights.beta);
}

void to_json(json& j, const GmmFitOptions& c) {
  j = json{{"variance", c.variance == GmmVariance::kTied ? "tied" : "per_phase"},
           {"eps0", c.eps0},
           {"eps1", c.eps1},
           {"equal_weights", c.equal_weights}};
}

void from_json(const json& j, GmmFitOptions& c) {
  const std::string v =
      j.value("variance", std::string(c.variance == GmmVariance::kTied ? "tied" : "per_phase"));
  if (v == "tied") {
    c.variance = GmmVariance::kTied;
  } else if (v == "per_phase") {
    c.variance = GmmVariance::kPerPhase;
  } else {
    throw UsageError("gmm variance must be 'tied' or 'per_phase'");
  }
  c.eps0 = j.value("eps0", c.eps0);
  c.eps1 = j.value("eps1", c.eps1);
  c.equal_weights = j.value("equal_weights", c.equal_weights);
}

void to_json(json& j, const PhaseSchema& s) {
  j = json{{"phases", s.phases}, {"boundary_start", s.boundary_start}, {"boundary_end", s.boundary_end}};
}

void from_json(const json& j, PhaseSchema& s) {
  s.phases = j.at("phases").get<std::vector<std::string>>();
  s.boundary_start = j.value("boundary_start", false);
  s.boundary_end = j.value("boundary_end", false);
}

void to_json(json& j, const RunConfig& c) {
  j = json{{"seed", c.seed},
           {"simulator", c.simulator},
           {"model", c.model},
           {"train", c.train},
           {"gmm", c.gmm},
           {"test_fraction", c.test_fraction},
           {"rho_min", c.rho_min},
           {"threads", c.threads}};
}

void from_json(const json& j, RunConfig& c) {
  c.seed = j.value("seed", c.seed);
  if (j.contains("simulator")) j.at("simulator").get_to(c.simulator);
  if (j.contains("model")) j.at("model").get_to(c.model);
  if (j.contains("train")) j.at("train").get_to(c.train);
  if (j.contains("gmm")) j.at("gmm").get_to(c.gmm);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.rho_min = j.value("rho_min", c.rho_min);
  c.threads = j.value("threads", c.threads);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("'" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

}  // namespace procest
