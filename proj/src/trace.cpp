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

#include "procest/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "procest/error.hpp"

namespace procest {

using json = nlohmann::json;

bool PhaseSchema::is_boundary(int phase) const {
  return (boundary_start && phase == 0) ||
         (boundary_end && phase == size() - 1);
}

int PhaseSchema::index_of(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (phases[static_cast<std::size_t>(i)] == name) return i;
  }
  return -1;
}

void PhaseSchema::validate() const {
  if (phases.size() < 2) throw DataError("phase schema needs at least 2 phases");
  std::set<std::string> seen(phases.begin(), phases.end());
  if (seen.size() != phases.size()) throw DataError("phase names must be unique");
  if (interior_count() < 1) {
    throw DataError("phase schema needs at least one non-boundary phase");
  }
}

std::vector<int> ProcessTrace::frame_phases() const {
  std::vector<int> out(static_cast<std::size_t>(num_frames()), 0);
  for (std::size_t m = 0; m < phase_marks.size(); ++m) {
    const auto begin = static_cast<std::size_t>(phase_marks[m].frame);
    const auto end = m + 1 < phase_marks.size()
                         ? static_cast<std::size_t>(phase_marks[m + 1].frame)
                         : out.size();
    std::fill(out.begin() + static_cast<std::ptrdiff_t>(begin),
              out.begin() + static_cast<std::ptrdiff_t>(end),
              phase_marks[m].phase);
  }
  return out;
}

void ProcessTrace::validate() const {
  schema.validate();
  const auto n = num_frames();
  if (static_cast<Eigen::Index>(timestamps.size()) != n) {
    throw DataError("trace '" + id + "': timestamp count does not match frames");
  }
  if (n < 1) throw DataError("trace '" + id + "' has no frames");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = timestamps[static_cast<std::size_t>(i)];
    if (!std::isfinite(t)) throw DataError("trace '" + id + "': non-finite timestamp");
    if (i > 0 && !(t > timestamps[static_cast<std::size_t>(i - 1)])) {
      throw DataError("trace '" + id + "': timestamps not strictly increasing at frame " +
                      std::to_string(i));
    }
  }
  if (!features.allFinite()) throw DataError("trace '" + id + "': non-finite feature");
  if (!std::isfinite(duration_s)) throw DataError("trace '" + id + "': non-finite duration");
  if (phase_marks.empty() || phase_marks.front().frame != 0) {
    throw DataError("trace '" + id + "': first phase mark must be at frame 0");
  }
  for (std::size_t m = 0; m < phase_marks.size(); ++m) {
    const auto& mark = phase_marks[m];
    if (mark.phase < 0 || mark.phase >= schema.size()) {
      throw DataError("trace '" + id + "': phase index out of range");
    }
    if (mark.frame < 0 || mark.frame >= n) {
      throw DataError("trace '" + id + "': phase mark frame out of range");
    }
    if (m > 0 && (mark.phase <= phase_marks[m - 1].phase ||
                  mark.frame <= phase_marks[m - 1].frame)) {
      throw DataError("trace '" + id + "': phase marks must be strictly increasing");
    }
  }
}

bool operator==(const ProcessTrace& a, const ProcessTrace& b) {
  return a.id == b.id && a.schema == b.schema && a.timestamps == b.timestamps &&
         a.features.rows() == b.features.rows() &&
         a.features.cols() == b.features.cols() &&
         (a.features.array() == b.features.array()).all() &&
         a.phase_marks == b.phase_marks && a.duration_s == b.duration_s;
}

CompletenessLabels label_completeness(const ProcessTrace& trace) {
  const auto n = static_cast<std::size_t>(trace.num_frames());
  if (n < 2) throw DataError("trace '" + trace.id + "': labeling needs >= 2 frames");
  if (!(trace.duration_s > 0.0)) {
    throw DataError("trace '" + trace.id + "': duration must be positive");
  }
  CompletenessLabels labels(n);
  const double t0 = trace.timestamps.front();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double fraction = (trace.timestamps[i] - t0) / trace.duration_s;
    const double segment = std::floor(kCompletenessSegments * fraction);
    labels[i] = std::clamp(segment, 0.0, double{kCompletenessSegments - 1}) /
                kCompletenessSegments;
  }
  labels[n - 1] = 1.0;
  return labels;
}

DatasetSplit split_dataset(const std::vector<ProcessTrace>& traces,
                           double test_fraction, std::uint64_t seed) {
  if (traces.size() < 2) throw UsageError("split_dataset needs at least 2 traces");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw UsageError("test_fraction must lie in (0, 1)");
  }
  std::set<std::string> ids;
  for (const auto& t : traces) {
    if (!ids.insert(t.id).second) throw DataError("duplicate trace id '" + t.id + "'");
  }
  const auto n = traces.size();
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());

  DatasetSplit split;
  for (std::size_t k = 0; k < n; ++k) {
    (k < n_test ? split.test : split.train).push_back(traces[order[k]]);
  }
  return split;
}

// ---- file format ----------------------------------------------------------

std::string format_trace_header(const TraceHeader& header) {
  json marks = json::array();
  for (const auto& m : header.phase_marks) marks.push_back({m.phase, m.frame});
  json doc = {{"version", 1},
              {"id", header.id},
              {"feature_dim", header.feature_dim},
              {"duration_s", header.duration_s},
              {"phases", header.schema.phases},
              {"phase_marks", std::move(marks)},
              {"boundary_start", header.schema.boundary_start},
              {"boundary_end", header.schema.boundary_end}};
  return doc.dump();
}

std::string format_frame_line(const FeatureFrame& frame) {
  json x = json::array();
  for (Eigen::Index i = 0; i < frame.features.size(); ++i) x.push_back(frame.features[i]);
  json doc = {{"t", frame.timestamp}, {"x", std::move(x)}};
  return doc.dump();
}

namespace {

[[noreturn]] void fail_at(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

json parse_object(std::string_view line, std::size_t line_no) {
  json doc;
  try {
    doc = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    fail_at(line_no, std::string("malformed record: ") + e.what());
  }
  if (!doc.is_object()) fail_at(line_no, "record is not an object");
  return doc;
}

}  // namespace

TraceHeader parse_trace_header(std::string_view line, std::size_t line_no) {
  const json doc = parse_object(line, line_no);
  TraceHeader h;
  try {
    if (doc.at("version").get<int>() != 1) fail_at(line_no, "unsupported trace version");
    h.id = doc.at("id").get<std::string>();
    h.feature_dim = doc.at("feature_dim").get<Eigen::Index>();
    h.duration_s = doc.at("duration_s").get<double>();
    h.schema.phases = doc.at("phases").get<std::vector<std::string>>();
    h.schema.boundary_start = doc.value("boundary_start", false);
    h.schema.boundary_end = doc.value("boundary_end", false);
    for (const auto& m : doc.at("phase_marks")) {
      if (!m.is_array() || m.size() != 2) fail_at(line_no, "phase mark must be [phase, frame]");
      h.phase_marks.push_back({m[0].get<int>(), m[1].get<std::int64_t>()});
    }
  } catch (const json::exception& e) {
    fail_at(line_no, std::string("bad header: ") + e.what());
  }
  if (h.feature_dim < 1) fail_at(line_no, "feature_dim must be >= 1");
  try {
    h.schema.validate();
  } catch (const DataError& e) {
    fail_at(line_no, e.what());
  }
  return h;
}

FeatureFrame parse_frame_line(std::string_view line, Eigen::Index feature_dim,
                              std::size_t line_no) {
  const json doc = parse_object(line, line_no);
  FeatureFrame frame;
  try {
    frame.timestamp = doc.at("t").get<double>();
    const auto& x = doc.at("x");
    if (!x.is_array()) fail_at(line_no, "'x' must be an array");
    if (static_cast<Eigen::Index>(x.size()) != feature_dim) {
      fail_at(line_no, "feature dimension " + std::to_string(x.size()) +
                           " does not match " + std::to_string(feature_dim));
    }
    frame.features.resize(feature_dim);
    for (Eigen::Index i = 0; i < feature_dim; ++i) {
      frame.features[i] = x[static_cast<std::size_t>(i)].get<double>();
    }
  } catch (const json::exception& e) {
    fail_at(line_no, std::string("bad frame: ") + e.what());
  }
  if (!std::isfinite(frame.timestamp) || !frame.features.allFinite()) {
    fail_at(line_no, "non-finite value in frame");
  }
  return frame;
}

void save_trace(const ProcessTrace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open '" + path.string() + "' for writing");
  out << format_trace_header({trace.id, trace.schema, trace.feature_dim(),
                              trace.duration_s, trace.phase_marks})
      << '\n';
  for (Eigen::Index i = 0; i < trace.num_frames(); ++i) {
    out << format_frame_line(trace.frame(i)) << '\n';
  }
  if (!out) throw UsageError("write failed for '" + path.string() + "'");
}

ProcessTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "': empty trace file");

  ProcessTrace trace;
  std::vector<FeatureFrame> frames;
  try {
    TraceHeader header = parse_trace_header(line, 1);
    trace.id = std::move(header.id);
    trace.schema = std::move(header.schema);
    trace.duration_s = header.duration_s;
    trace.phase_marks = std::move(header.phase_marks);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      FeatureFrame f = parse_frame_line(line, header.feature_dim, line_no);
      if (!frames.empty() && !(f.timestamp > frames.back().timestamp)) {
        fail_at(line_no, "timestamps must be strictly increasing");
      }
      frames.push_back(std::move(f));
    }
    trace.features.resize(header.feature_dim, static_cast<Eigen::Index>(frames.size()));
  } catch (const DataError& e) {
    throw DataError("'" + path.string() + "' " + e.what());
  }
  trace.timestamps.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    trace.timestamps.push_back(frames[i].timestamp);
    trace.features.col(static_cast<Eigen::Index>(i)) = frames[i].features;
  }
  try {
    trace.validate();
  } catch (const DataError& e) {
    throw DataError("'" + path.string() + "': " + e.what());
  }
  return trace;
}

void save_dataset(const std::vector<ProcessTrace>& traces,
                  const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create directory '" + dir.string() + "'");
  for (const auto& t : traces) save_trace(t, dir / (t.id + ".trace"));
}

std::vector<ProcessTrace> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("dataset directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".trace") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no *.trace files in '" + dir.string() + "'");
  std::vector<ProcessTrace> traces;
  traces.reserve(files.size());
  for (const auto& f : files) traces.push_back(load_trace(f));
  return traces;
}

}  // namespace procest
