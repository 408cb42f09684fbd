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

#include "procest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "procest/error.hpp"

namespace procest {

namespace {

void check_sequences(std::span<const int> gt, std::span<const int> pred, int k) {
  if (gt.size() != pred.size()) throw UsageError("metrics: sequences differ in length");
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i] < 0 || gt[i] >= k || pred[i] < 0 || pred[i] >= k) {
      throw UsageError("metrics: class index out of range at frame " + std::to_string(i));
    }
  }
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

void ConfusionMatrix::add(std::span<const int> gt, std::span<const int> pred) {
  check_sequences(gt, pred, num_classes());
  for (std::size_t i = 0; i < gt.size(); ++i) ++counts(gt[i], pred[i]);
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  const auto n = static_cast<double>(cm.total());
  if (n <= 0.0) throw UsageError("classification_report: no frames");
  const Eigen::MatrixXd c = cm.counts.cast<double>();
  const Eigen::VectorXd truth = c.rowwise().sum();
  const Eigen::VectorXd predicted = c.colwise().sum().transpose();

  ClassificationReport r;
  r.per_class.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double tp = c(i, i);
    const double fp = predicted(i) - tp;
    const double fn = truth(i) - tp;
    const double tn = n - tp - fp - fn;
    auto& s = r.per_class[static_cast<std::size_t>(i)];
    s.support = truth(i);
    s.precision = ratio(tp, tp + fp);
    s.recall = ratio(tp, tp + fn);
    s.f1 = ratio(2.0 * s.precision * s.recall, s.precision + s.recall);
    s.informedness = s.recall + ratio(tn, tn + fp) - 1.0;
    s.markedness = s.precision + ratio(tn, tn + fn) - 1.0;
    const double w = s.support / n;
    r.precision += w * s.precision;
    r.recall += w * s.recall;
    r.f1 += w * s.f1;
    r.informedness += w * s.informedness;
    r.markedness += w * s.markedness;
  }
  const double correct = c.trace();
  r.accuracy = correct / n;
  const double cov_xy = correct * n - predicted.dot(truth);
  const double cov_xx = n * n - predicted.squaredNorm();
  const double cov_yy = n * n - truth.squaredNorm();
  const double den = std::sqrt(cov_xx * cov_yy);
  r.mcc = den > 0.0 ? cov_xy / den : 0.0;
  return r;
}

ClassificationReport classification_report(std::span<const int> gt, std::span<const int> pred,
                                           int num_classes) {
  if (gt.empty()) throw UsageError("classification_report: empty sequences");
  ConfusionMatrix cm(num_classes);
  cm.add(gt, pred);
  return classification_report(cm);
}

// ---- segment errors ----------------------------------------------------------

SegmentCounts::SegmentCounts(int num_classes)
    : support(static_cast<std::size_t>(num_classes), 0),
      fragmentation(static_cast<std::size_t>(num_classes), 0),
      under_fill(static_cast<std::size_t>(num_classes), 0),
      over_fill(static_cast<std::size_t>(num_classes), 0) {}

void SegmentCounts::add(std::span<const int> gt, std::span<const int> pred) {
  const int k = static_cast<int>(support.size());
  check_sequences(gt, pred, k);
  const std::size_t n = gt.size();
  total += static_cast<std::int64_t>(n);
  for (std::size_t i = 0; i < n; ++i) ++support[static_cast<std::size_t>(gt[i])];

  // Ground-truth runs: fragmentation and under-fill of the run's class.
  for (std::size_t s = 0; s < n;) {
    const int c = gt[s];
    std::size_t e = s;
    while (e + 1 < n && gt[e + 1] == c) ++e;
    std::size_t first = e + 1, last = 0;
    for (std::size_t i = s; i <= e; ++i) {
      if (pred[i] == c) {
        first = std::min(first, i);
        last = i;
      }
    }
    const auto cu = static_cast<std::size_t>(c);
    if (first > e) {
      under_fill[cu] += static_cast<std::int64_t>(e - s + 1);
    } else {
      under_fill[cu] += static_cast<std::int64_t>((first - s) + (e - last));
      for (std::size_t i = first + 1; i < last; ++i) fragmentation[cu] += pred[i] != c ? 1 : 0;
    }
    s = e + 1;
  }

  // Predicted runs: over-fill of the run's class when it touches a gt run.
  for (std::size_t a = 0; a < n;) {
    const int c = pred[a];
    std::size_t b = a;
    while (b + 1 < n && pred[b + 1] == c) ++b;
    const std::size_t lo = a > 0 ? a - 1 : a;
    const std::size_t hi = std::min(b + 1, n - 1);
    bool touches = false;
    for (std::size_t i = lo; i <= hi && !touches; ++i) touches = gt[i] == c;
    if (touches) {
      for (std::size_t i = a; i <= b; ++i) {
        over_fill[static_cast<std::size_t>(c)] += gt[i] != c ? 1 : 0;
      }
    }
    a = b + 1;
  }
}

SegmentErrorReport segment_error_report(const SegmentCounts& counts) {
  SegmentErrorReport r;
  if (counts.total == 0) return r;
  const auto n = static_cast<double>(counts.total);
  for (std::size_t c = 0; c < counts.support.size(); ++c) {
    const double w = static_cast<double>(counts.support[c]) / n;
    r.fragmentation += w * static_cast<double>(counts.fragmentation[c]) / n;
    r.under_fill += w * static_cast<double>(counts.under_fill[c]) / n;
    r.over_fill += w * static_cast<double>(counts.over_fill[c]) / n;
  }
  return r;
}

SegmentErrorReport two_set(std::span<const int> gt, std::span<const int> pred, int num_classes) {
  SegmentCounts counts(num_classes);
  counts.add(gt, pred);
  return segment_error_report(counts);
}

// ---- completeness error -------------------------------------------------------

CompletenessErrorAccumulator::CompletenessErrorAccumulator(int num_phases)
    : phase_sum_(static_cast<std::size_t>(num_phases), 0.0),
      bin_sum_(kCurveBins, 0.0),
      phase_count_(static_cast<std::size_t>(num_phases), 0),
      bin_count_(kCurveBins, 0) {}

void CompletenessErrorAccumulator::add(std::span<const double> labels,
                                       std::span<const double> estimates,
                                       std::span<const int> phases,
                                       std::span<const double> normalized_time) {
  const auto n = labels.size();
  if (estimates.size() != n || phases.size() != n || normalized_time.size() != n) {
    throw UsageError("completeness_error: inputs differ in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double err = std::abs(estimates[i] - labels[i]);
    sum_ += err;
    ++count_;
    const int p = phases[i];
    if (p < 0 || p >= static_cast<int>(phase_sum_.size())) {
      throw UsageError("completeness_error: phase index out of range");
    }
    phase_sum_[static_cast<std::size_t>(p)] += err;
    ++phase_count_[static_cast<std::size_t>(p)];
    const double bin = std::floor(kCurveBins * std::clamp(normalized_time[i], 0.0, 1.0));
    const auto b = static_cast<std::size_t>(std::min(bin, double{kCurveBins - 1}));
    bin_sum_[b] += err;
    ++bin_count_[b];
  }
}

void CompletenessErrorAccumulator::add(const ProcessTrace& trace,
                                       std::span<const double> estimates) {
  const auto labels = label_completeness(trace);
  const auto phases = trace.frame_phases();
  const auto times = normalized_times(trace);
  add(labels, estimates, phases, times);
}

CompletenessErrorReport CompletenessErrorAccumulator::report() const {
  CompletenessErrorReport r;
  r.frames = count_;
  r.overall = count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0;
  for (std::size_t p = 0; p < phase_sum_.size(); ++p) {
    r.per_phase.push_back(phase_count_[p] > 0 ? std::optional(phase_sum_[p] / static_cast<double>(phase_count_[p]))
                                              : std::nullopt);
  }
  for (std::size_t b = 0; b < bin_sum_.size(); ++b) {
    r.curve.push_back(bin_count_[b] > 0 ? std::optional(bin_sum_[b] / static_cast<double>(bin_count_[b]))
                                        : std::nullopt);
  }
  return r;
}

CompletenessErrorReport completeness_error(std::span<const double> labels,
                                           std::span<const double> estimates,
                                           std::span<const int> phases,
                                           std::span<const double> normalized_time,
                                           int num_phases) {
  CompletenessErrorAccumulator acc(num_phases);
  acc.add(labels, estimates, phases, normalized_time);
  return acc.report();
}

std::vector<double> normalized_times(const ProcessTrace& trace) {
  if (!(trace.duration_s > 0.0)) throw DataError("trace '" + trace.id + "' has no duration");
  std::vector<double> out(trace.timestamps.size());
  const double t0 = trace.timestamps.front();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (trace.timestamps[i] - t0) / trace.duration_s;
  }
  return out;
}

// ---- remaining-time error -------------------------------------------------------

RemainingTimeErrorAccumulator::RemainingTimeErrorAccumulator(int num_phases)
    : phase_sum_(static_cast<std::size_t>(num_phases), 0.0),
      phase_count_(static_cast<std::size_t>(num_phases), 0) {}

void RemainingTimeErrorAccumulator::add(std::span<const double> true_remaining,
                                        std::span<const std::optional<double>> estimates,
                                        std::span<const int> phases) {
  if (estimates.size() != true_remaining.size() || phases.size() != true_remaining.size()) {
    throw UsageError("remaining_time_error: reports are not aligned with frames");
  }
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    ++frames_;
    if (!estimates[i]) {
      ++unknown_;
      continue;
    }
    const int p = phases[i];
    if (p < 0 || p >= static_cast<int>(phase_sum_.size())) {
      throw UsageError("remaining_time_error: phase index out of range");
    }
    const double err = std::abs(*estimates[i] - true_remaining[i]);
    sum_ += err;
    ++known_;
    phase_sum_[static_cast<std::size_t>(p)] += err;
    ++phase_count_[static_cast<std::size_t>(p)];
  }
}

void RemainingTimeErrorAccumulator::add(const ProcessTrace& trace,
                                        std::span<const ProgressReport> reports) {
  if (static_cast<Eigen::Index>(reports.size()) != trace.num_frames()) {
    throw UsageError("remaining_time_error: " + std::to_string(reports.size()) +
                     " reports for " + std::to_string(trace.num_frames()) + " frames");
  }
  std::vector<double> truth(reports.size());
  std::vector<std::optional<double>> est(reports.size());
  const double t0 = trace.timestamps.front();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].timestamp != trace.timestamps[i]) {
      throw UsageError("remaining_time_error: report " + std::to_string(i) +
                       " is not aligned with its frame");
    }
    truth[i] = trace.duration_s - (trace.timestamps[i] - t0);
    est[i] = reports[i].remaining_s;
  }
  const auto phases = trace.frame_phases();
  add(truth, est, phases);
}

RemainingTimeErrorReport RemainingTimeErrorAccumulator::report() const {
  RemainingTimeErrorReport r;
  r.frames = frames_;
  r.unknown = unknown_;
  if (known_ > 0) r.overall = sum_ / static_cast<double>(known_);
  for (std::size_t p = 0; p < phase_sum_.size(); ++p) {
    r.per_phase.push_back(phase_count_[p] > 0 ? std::optional(phase_sum_[p] / static_cast<double>(phase_count_[p]))
                                              : std::nullopt);
  }
  return r;
}

RemainingTimeErrorReport remaining_time_error(const ProcessTrace& trace,
                                              std::span<const ProgressReport> reports) {
  RemainingTimeErrorAccumulator acc(trace.schema.size());
  acc.add(trace, reports);
  return acc.report();
}

std::int64_t non_adjacent_jumps(std::span<const int> phases) {
  std::int64_t jumps = 0;
  for (std::size_t i = 1; i < phases.size(); ++i) {
    if (std::abs(phases[i] - phases[i - 1]) > 1) ++jumps;
  }
  return jumps;
}

std::int64_t backward_transitions(std::span<const int> phases) {
  std::int64_t n = 0;
  for (std::size_t i = 1; i < phases.size(); ++i) n += phases[i] < phases[i - 1] ? 1 : 0;
  return n;
}

}  // namespace procest
