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

#include "procest/inference.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "procest/error.hpp"

namespace procest {

std::optional<double> remaining_time(double rho, double tau, double rho_min) {
  if (!(tau >= 0.0)) throw UsageError("remaining_time: elapsed time must be >= 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw UsageError("remaining_time: completeness outside [0, 1]");
  if (rho < rho_min) return std::nullopt;
  return (tau / rho) * (1.0 - rho);
}

std::string format_report_line(const ProgressReport& report) {
  nlohmann::json doc = {{"t", report.timestamp},
                        {"completeness", report.completeness},
                        {"phase", report.phase_name}};
  doc["remaining_s"] = report.remaining_s ? nlohmann::json(*report.remaining_s) : nlohmann::json();
  return doc.dump();
}

OnlineEstimator::OnlineEstimator(const ProgressRegressor& model, const PhaseGmm& gmm,
                                 double rho_min)
    : model_(&model), gmm_(&gmm), rho_min_(rho_min), state_(model.initial_state()) {
  if (!(gmm.schema.interior_count() == gmm.kernel_count())) {
    throw UsageError("online estimator: mixture does not match its schema");
  }
  window_.reserve(static_cast<std::size_t>(model.smoother().radius()) + 1);
}

void OnlineEstimator::reset() {
  state_ = model_->initial_state();
  window_.clear();
  first_timestamp_.reset();
  last_timestamp_ = 0.0;
  elapsed_ = 0.0;
  completeness_ = 0.0;
  frames_ = 0;
}

ProgressReport OnlineEstimator::step(const FeatureFrame& frame) {
  if (first_timestamp_ && !(frame.timestamp > last_timestamp_)) {
    throw DataError("online estimator: timestamp " + std::to_string(frame.timestamp) +
                    " does not advance past " + std::to_string(last_timestamp_));
  }
  const double y = model_->raw_step(frame.features, state_);
  const auto capacity = static_cast<std::size_t>(model_->smoother().radius()) + 1;
  if (window_.size() == capacity) window_.erase(window_.begin());
  window_.push_back(y);
  completeness_ = model_->smoother().apply(window_);

  if (!first_timestamp_) first_timestamp_ = frame.timestamp;
  last_timestamp_ = frame.timestamp;
  elapsed_ = frame.timestamp - *first_timestamp_;
  ++frames_;

  ProgressReport r;
  r.timestamp = frame.timestamp;
  r.completeness = completeness_;
  r.phase = predict_phase(*gmm_, std::clamp(completeness_, 0.0, 1.0));
  r.phase_name = gmm_->schema.phases[static_cast<std::size_t>(r.phase)];
  r.remaining_s = remaining_time(std::clamp(completeness_, 0.0, 1.0), elapsed_, rho_min_);
  return r;
}

std::vector<ProgressReport> run_online(const ProgressRegressor& model, const PhaseGmm& gmm,
                                       const ProcessTrace& trace, double rho_min) {
  OnlineEstimator est(model, gmm, rho_min);
  std::vector<ProgressReport> out;
  out.reserve(static_cast<std::size_t>(trace.num_frames()));
  for (Eigen::Index i = 0; i < trace.num_frames(); ++i) out.push_back(est.step(trace.frame(i)));
  return out;
}

}  // namespace procest
