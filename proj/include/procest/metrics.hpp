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
#include <optional>
#include <span>
#include <vector>

#include "procest/inference.hpp"
#include "procest/trace.hpp"

namespace procest {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
  CountMatrix counts;

  explicit ConfusionMatrix(int num_classes = 0)
      : counts(CountMatrix::Zero(num_classes, num_classes)) {}

  [[nodiscard]] int num_classes() const { return static_cast<int>(counts.rows()); }
  [[nodiscard]] std::int64_t total() const { return counts.sum(); }
  /// Adds one frame-aligned pair of sequences. Throws UsageError on bad input.
  void add(std::span<const int> gt, std::span<const int> pred);
};

struct ClassScores {
  double support = 0.0;  // ground-truth frames of this class
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double informedness = 0.0;
  double markedness = 0.0;
};

/// One-vs-rest scores averaged with ground-truth support weights, plus the
/// multiclass Matthews correlation. Zero denominators contribute 0.
struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double informedness = 0.0;
  double markedness = 0.0;
  double mcc = 0.0;
  std::vector<ClassScores> per_class;
};

ClassificationReport classification_report(const ConfusionMatrix& cm);
ClassificationReport classification_report(std::span<const int> gt, std::span<const int> pred,
                                           int num_classes);

/// Frame counts behind the segment-error rates, per class.
struct SegmentCounts {
  std::vector<std::int64_t> support, fragmentation, under_fill, over_fill;
  std::int64_t total = 0;

  explicit SegmentCounts(int num_classes = 0);
  void add(std::span<const int> gt, std::span<const int> pred);
};

/// Rates in [0, 1]: per-class frame count / total frames, averaged with
/// ground-truth support weights.
struct SegmentErrorReport {
  double fragmentation = 0.0;
  double under_fill = 0.0;
  double over_fill = 0.0;
};

SegmentErrorReport segment_error_report(const SegmentCounts& counts);

/// Per class c and each maximal ground-truth run of c:
///  - fragmentation: frames predicted != c strictly between the first and
///    last correctly predicted frames of the run;
///  - under-fill: wrong frames at the run's head or tail, or the whole run
///    when nothing in it is predicted c;
///  - over-fill: frames predicted c outside every ground-truth run of c that
///    belong to a predicted run of c overlapping or adjacent to one.
SegmentErrorReport two_set(std::span<const int> gt, std::span<const int> pred, int num_classes);

inline constexpr int kCurveBins = 100;

struct CompletenessErrorReport {
  double overall = 0.0;
  std::vector<std::optional<double>> per_phase;  // empty when a phase has no frames
  std::vector<std::optional<double>> curve;      // kCurveBins bins over t / T
  std::int64_t frames = 0;
};

class CompletenessErrorAccumulator {
 public:
  explicit CompletenessErrorAccumulator(int num_phases);
  /// `normalized_time` holds t / T in [0, 1] for each frame.
  void add(std::span<const double> labels, std::span<const double> estimates,
           std::span<const int> phases, std::span<const double> normalized_time);
  void add(const ProcessTrace& trace, std::span<const double> estimates);
  [[nodiscard]] CompletenessErrorReport report() const;

 private:
  double sum_ = 0.0;
  std::int64_t count_ = 0;
  std::vector<double> phase_sum_, bin_sum_;
  std::vector<std::int64_t> phase_count_, bin_count_;
};

CompletenessErrorReport completeness_error(std::span<const double> labels,
                                           std::span<const double> estimates,
                                           std::span<const int> phases,
                                           std::span<const double> normalized_time,
                                           int num_phases);

/// Normalized time t / T of every frame of a trace.
std::vector<double> normalized_times(const ProcessTrace& trace);

struct RemainingTimeErrorReport {
  std::optional<double> overall;                 // mean |estimate - (T - t)| seconds
  std::vector<std::optional<double>> per_phase;  // by ground-truth phase
  std::int64_t frames = 0;
  std::int64_t unknown = 0;  // frames whose estimate was unknown (excluded)
};

class RemainingTimeErrorAccumulator {
 public:
  explicit RemainingTimeErrorAccumulator(int num_phases);
  /// Reports must be aligned one-to-one with the trace frames.
  void add(const ProcessTrace& trace, std::span<const ProgressReport> reports);
  /// Lower-level form: ground-truth remaining seconds per frame.
  void add(std::span<const double> true_remaining, std::span<const std::optional<double>> estimates,
           std::span<const int> phases);
  [[nodiscard]] RemainingTimeErrorReport report() const;

 private:
  double sum_ = 0.0;
  std::int64_t known_ = 0, frames_ = 0, unknown_ = 0;
  std::vector<double> phase_sum_;
  std::vector<std::int64_t> phase_count_;
};

RemainingTimeErrorReport remaining_time_error(const ProcessTrace& trace,
                                              std::span<const ProgressReport> reports);

/// Consecutive-frame transitions whose phase indices differ by more than one.
std::int64_t non_adjacent_jumps(std::span<const int> phases);
/// Consecutive-frame transitions to an earlier phase.
std::int64_t backward_transitions(std::span<const int> phases);

}  // namespace procest
