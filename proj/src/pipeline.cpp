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

#include "procest/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "procest/error.hpp"
#include "procest/inference.hpp"

namespace procest {

using nlohmann::json;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PROCEST_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw UsageError("PROCEST_THREADS must be a positive integer");
    }
    return static_cast<int>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Work is handed out by index; results land in their own slot so the merge
// below never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

json optional_array(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(v ? json(*v) : json());
  return out;
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt(const std::optional<double>& v, const char* spec = "%.4f") {
  return v ? fmt(*v, spec) : std::string("-");
}

}  // namespace

EvaluationReport evaluate_dataset(const ProgressRegressor& model, const PhaseGmm& gmm,
                                  const std::vector<ProcessTrace>& traces, double rho_min,
                                  int threads) {
  if (traces.empty()) throw DataError("evaluation: empty dataset");
  for (const auto& t : traces) {
    if (!(t.schema == gmm.schema)) {
      throw DataError("evaluation: trace '" + t.id + "' phase schema does not match the model");
    }
    if (t.feature_dim() != model.config().feature_dim) {
      throw DataError("evaluation: trace '" + t.id + "' has " + std::to_string(t.feature_dim()) +
                      " features, model expects " + std::to_string(model.config().feature_dim));
    }
  }

  std::vector<std::vector<ProgressReport>> runs(traces.size());
  parallel_for(traces.size(), resolve_threads(threads),
               [&](std::size_t i) { runs[i] = run_online(model, gmm, traces[i], rho_min); });
  return evaluate_reports(gmm.schema, traces, runs);
}

EvaluationReport evaluate_reports(const PhaseSchema& schema, const std::vector<ProcessTrace>& traces,
                                  const std::vector<std::vector<ProgressReport>>& reports) {
  if (traces.empty()) throw DataError("evaluation: empty dataset");
  if (reports.size() != traces.size()) {
    throw UsageError("evaluation: one report sequence per trace expected");
  }
  const int k = schema.size();
  EvaluationReport report;
  report.schema = schema;
  report.confusion = ConfusionMatrix(k);
  SegmentCounts segments(k);
  CompletenessErrorAccumulator completeness(k);
  RemainingTimeErrorAccumulator remaining(k);

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& trace = traces[i];
    const auto& run = reports[i];
    if (static_cast<Eigen::Index>(run.size()) != trace.num_frames()) {
      throw UsageError("evaluation: reports for '" + trace.id + "' are not aligned with its frames");
    }
    std::vector<double> estimates;
    std::vector<int> predicted;
    estimates.reserve(run.size());
    predicted.reserve(run.size());
    for (const auto& r : run) {
      estimates.push_back(r.completeness);
      predicted.push_back(r.phase);
    }
    const auto gt = trace.frame_phases();
    report.confusion.add(gt, predicted);
    segments.add(gt, predicted);
    completeness.add(trace, estimates);
    remaining.add(trace, run);

    TraceSummary s;
    s.id = trace.id;
    s.frames = trace.num_frames();
    s.completeness_mae =
        completeness_error(label_completeness(trace), estimates, gt, normalized_times(trace), k)
            .overall;
    std::int64_t hits = 0;
    for (std::size_t f = 0; f < gt.size(); ++f) hits += gt[f] == predicted[f];
    s.accuracy = static_cast<double>(hits) / static_cast<double>(gt.size());
    s.non_adjacent_jumps = non_adjacent_jumps(predicted);
    s.backward_transitions = backward_transitions(predicted);
    report.non_adjacent_jumps += s.non_adjacent_jumps;
    report.traces.push_back(std::move(s));
  }

  report.classification = classification_report(report.confusion);
  report.two_set = segment_error_report(segments);
  report.completeness = completeness.report();
  report.remaining_time = remaining.report();
  return report;
}

json to_json(const EvaluationReport& r) {
  json confusion = json::array();
  for (Eigen::Index i = 0; i < r.confusion.counts.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.confusion.counts.cols(); ++j) row.push_back(r.confusion.counts(i, j));
    confusion.push_back(std::move(row));
  }
  const auto& c = r.classification;
  json per_class = json::array();
  for (std::size_t p = 0; p < c.per_class.size(); ++p) {
    const auto& s = c.per_class[p];
    per_class.push_back({{"phase", r.schema.phases[p]},
                         {"support", s.support},
                         {"precision", s.precision},
                         {"recall", s.recall},
                         {"f1", s.f1},
                         {"informedness", s.informedness},
                         {"markedness", s.markedness}});
  }
  json traces = json::array();
  for (const auto& t : r.traces) {
    traces.push_back({{"id", t.id},
                      {"frames", t.frames},
                      {"completeness_mae", t.completeness_mae},
                      {"accuracy", t.accuracy},
                      {"non_adjacent_jumps", t.non_adjacent_jumps},
                      {"backward_transitions", t.backward_transitions}});
  }
  return json{
      {"format", "procest-report"},
      {"version", 1},
      {"phases", r.schema.phases},
      {"confusion_matrix", std::move(confusion)},
      {"classification_report",
       {{"accuracy", c.accuracy},
        {"precision", c.precision},
        {"recall", c.recall},
        {"f1", c.f1},
        {"informedness", c.informedness},
        {"markedness", c.markedness},
        {"mcc", c.mcc},
        {"per_class", std::move(per_class)}}},
      {"two_set",
       {{"fragmentation", r.two_set.fragmentation},
        {"under_fill", r.two_set.under_fill},
        {"over_fill", r.two_set.over_fill}}},
      {"completeness_error",
       {{"overall", r.completeness.overall},
        {"frames", r.completeness.frames},
        {"per_phase", optional_array(r.completeness.per_phase)},
        {"curve", optional_array(r.completeness.curve)}}},
      {"remaining_time_error",
       {{"overall_s", r.remaining_time.overall ? json(*r.remaining_time.overall) : json()},
        {"frames", r.remaining_time.frames},
        {"unknown", r.remaining_time.unknown},
        {"per_phase_s", optional_array(r.remaining_time.per_phase)}}},
      {"non_adjacent_jumps", r.non_adjacent_jumps},
      {"traces", std::move(traces)}};
}

std::string format_report_table(const EvaluationReport& r) {
  std::ostringstream out;
  const auto& c = r.classification;
  out << "traces " << r.traces.size() << ", frames " << r.completeness.frames << "\n\n";
  out << "accuracy      " << fmt(c.accuracy) << "\n"
      << "precision     " << fmt(c.precision) << "\n"
      << "recall        " << fmt(c.recall) << "\n"
      << "f1            " << fmt(c.f1) << "\n"
      << "informedness  " << fmt(c.informedness) << "\n"
      << "markedness    " << fmt(c.markedness) << "\n"
      << "mcc           " << fmt(c.mcc) << "\n\n";
  out << "fragmentation " << fmt(r.two_set.fragmentation) << "\n"
      << "under_fill    " << fmt(r.two_set.under_fill) << "\n"
      << "over_fill     " << fmt(r.two_set.over_fill) << "\n"
      << "non-adjacent jumps " << r.non_adjacent_jumps << "\n\n";
  out << "completeness MAE   " << fmt(r.completeness.overall) << "\n"
      << "remaining time MAE " << fmt(r.remaining_time.overall, "%.1f") << " s ("
      << r.remaining_time.unknown << " unknown frames)\n\n";

  std::size_t width = 5;
  for (const auto& p : r.schema.phases) width = std::max(width, p.size());
  auto pad = [&](const std::string& s) { return s + std::string(width + 2 - s.size(), ' '); };
  out << pad("phase") << "support  precision  recall  f1      compl_mae  remain_s\n";
  for (std::size_t p = 0; p < c.per_class.size(); ++p) {
    const auto& s = c.per_class[p];
    char line[160];
    std::snprintf(line, sizeof line, "%-7.0f  %-9.4f  %-6.4f  %-6.4f  %-9s  %s\n", s.support,
                  s.precision, s.recall, s.f1, fmt(r.completeness.per_phase[p]).c_str(),
                  fmt(r.remaining_time.per_phase[p], "%.1f").c_str());
    out << pad(r.schema.phases[p]) << line;
  }
  out << "\nconfusion (rows: truth, columns: predicted)\n";
  for (Eigen::Index i = 0; i < r.confusion.counts.rows(); ++i) {
    out << pad(r.schema.phases[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < r.confusion.counts.cols(); ++j) {
      char cell[32];
      std::snprintf(cell, sizeof cell, "%7lld", static_cast<long long>(r.confusion.counts(i, j)));
      out << cell;
    }
    out << "\n";
  }
  return out.str();
}

std::vector<SweepRow> sweep_alpha_beta(const std::vector<ProcessTrace>& train_set,
                                       const std::vector<ProcessTrace>& eval_set,
                                       const PhaseGmm& gmm, const RegressorConfig& model_config,
                                       std::uint64_t init_seed, TrainConfig train_config,
                                       double rho_min, int threads) {
  std::vector<SweepRow> rows;
  for (int step = 0; step <= 5; ++step) {
    const double alpha = step / 5.0;
    train_config.weights = {alpha, 1.0 - alpha};
    auto result = train(ProgressRegressor(model_config, init_seed), train_set, gmm, train_config);
    const auto report = evaluate_dataset(result.model, gmm, eval_set, rho_min, threads);
    rows.push_back({alpha, 1.0 - alpha, report.completeness.overall,
                    report.classification.accuracy, report.classification.f1,
                    static_cast<int>(result.log.size())});
  }
  return rows;
}

json to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"alpha", r.alpha},
                   {"beta", r.beta},
                   {"completeness_mae", r.completeness_mae},
                   {"accuracy", r.accuracy},
                   {"f1", r.f1},
                   {"epochs", r.epochs}});
  }
  return json{{"format", "procest-sweep"}, {"version", 1}, {"rows", std::move(out)}};
}

std::string format_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "alpha  beta  compl_mae  accuracy  f1      epochs\n";
  for (const auto& r : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-5.1f  %-4.1f  %-9.4f  %-8.4f  %-6.4f  %d\n", r.alpha,
                  r.beta, r.completeness_mae, r.accuracy, r.f1, r.epochs);
    out << line;
  }
  return out.str();
}

}  // namespace procest
