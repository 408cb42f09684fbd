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
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace procest {

/// Ordered phase names of a linear process. The first and/or last phase may
/// be flagged as boundary phases (pre-start, end signal); those are detected
/// by completeness thresholds instead of the phase mixture.
struct PhaseSchema {
  std::vector<std::string> phases;
  bool boundary_start = false;
  bool boundary_end = false;

  [[nodiscard]] int size() const { return static_cast<int>(phases.size()); }
  [[nodiscard]] int first_interior() const { return boundary_start ? 1 : 0; }
  [[nodiscard]] int interior_count() const {
    return size() - (boundary_start ? 1 : 0) - (boundary_end ? 1 : 0);
  }
  [[nodiscard]] bool is_boundary(int phase) const;
  [[nodiscard]] int index_of(std::string_view name) const;  // -1 when absent

  /// Throws DataError unless there are >= 2 unique names and >= 1 interior phase.
  void validate() const;

  friend bool operator==(const PhaseSchema&, const PhaseSchema&) = default;
};

struct FeatureFrame {
  double timestamp = 0.0;
  Eigen::VectorXd features;
};

struct PhaseMark {
  int phase = 0;
  std::int64_t frame = 0;

  friend bool operator==(const PhaseMark&, const PhaseMark&) = default;
};

/// One enactment of the process. Features are stored column-per-frame.
struct ProcessTrace {
  std::string id;
  PhaseSchema schema;
  std::vector<double> timestamps;
  Eigen::MatrixXd features;  // feature_dim x num_frames
  std::vector<PhaseMark> phase_marks;
  double duration_s = 0.0;

  [[nodiscard]] Eigen::Index num_frames() const { return features.cols(); }
  [[nodiscard]] Eigen::Index feature_dim() const { return features.rows(); }
  [[nodiscard]] FeatureFrame frame(Eigen::Index i) const {
    return {timestamps[static_cast<std::size_t>(i)], features.col(i)};
  }

  /// Ground-truth phase index of every frame, expanded from phase_marks.
  [[nodiscard]] std::vector<int> frame_phases() const;

  /// Throws DataError on any broken invariant (timestamps, marks, shapes).
  void validate() const;
};

bool operator==(const ProcessTrace& a, const ProcessTrace& b);

/// Stepwise completeness targets, one per frame, quantized to 1/20.
using CompletenessLabels = std::vector<double>;

inline constexpr int kCompletenessSegments = 20;

/// Lower edge of the 5% segment containing each frame; the final frame is 1.
CompletenessLabels label_completeness(const ProcessTrace& trace);

struct DatasetSplit {
  std::vector<ProcessTrace> train;
  std::vector<ProcessTrace> test;
};

/// Whole-trace partition; test size is round(test_fraction * N), at least 1.
DatasetSplit split_dataset(const std::vector<ProcessTrace>& traces,
                           double test_fraction, std::uint64_t seed);

// ---- trace file format ----------------------------------------------------
// Line 1: {"version":1,"id":..,"feature_dim":F,"duration_s":..,"phases":[..],
//          "phase_marks":[[phase,frame],..],"boundary_start":b,"boundary_end":b}
// Lines 2..: {"t":seconds,"x":[F reals]}

struct TraceHeader {
  std::string id;
  PhaseSchema schema;
  Eigen::Index feature_dim = 0;
  double duration_s = 0.0;
  std::vector<PhaseMark> phase_marks;
};

std::string format_trace_header(const TraceHeader& header);
std::string format_frame_line(const FeatureFrame& frame);

/// `line_no` is only used to label errors.
TraceHeader parse_trace_header(std::string_view line, std::size_t line_no = 1);
FeatureFrame parse_frame_line(std::string_view line, Eigen::Index feature_dim,
                              std::size_t line_no);

void save_trace(const ProcessTrace& trace, const std::filesystem::path& path);
ProcessTrace load_trace(const std::filesystem::path& path);

/// Writes `<dir>/<id>.trace` for every trace.
void save_dataset(const std::vector<ProcessTrace>& traces,
                  const std::filesystem::path& dir);
/// Loads every *.trace file in `dir`, sorted by file name.
std::vector<ProcessTrace> load_dataset(const std::filesystem::path& dir);

}  // namespace procest
