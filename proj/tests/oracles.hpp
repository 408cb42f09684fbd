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

// Independent reference implementations used by the unit and acceptance
// tests. Written from the definitions, deliberately not sharing code paths
// with the library.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "procest/gmm.hpp"
#include "procest/nn/adam.hpp"
#include "procest/regressor.hpp"
#include "procest/simulator.hpp"
#include "procest/trace.hpp"

namespace oracle {

// ---- metrics ----------------------------------------------------------------

struct Scores {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, informedness = 0, markedness = 0,
         mcc = 0;
};

inline double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

// Per-class one-vs-rest counting straight from the sequences.
inline Scores classification(const std::vector<int>& gt, const std::vector<int>& pred, int k) {
  const double n = static_cast<double>(gt.size());
  Scores s;
  double correct = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) correct += gt[i] == pred[i];
  s.accuracy = correct / n;
  for (int c = 0; c < k; ++c) {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const bool g = gt[i] == c, p = pred[i] == c;
      if (g && p) tp += 1;
      if (!g && p) fp += 1;
      if (g && !p) fn += 1;
      if (!g && !p) tn += 1;
    }
    const double w = (tp + fn) / n;
    const double prec = safe_div(tp, tp + fp), rec = safe_div(tp, tp + fn);
    s.precision += w * prec;
    s.recall += w * rec;
    s.f1 += w * safe_div(2 * prec * rec, prec + rec);
    s.informedness += w * (rec + safe_div(tn, tn + fp) - 1);
    s.markedness += w * (prec + safe_div(tn, tn + fn) - 1);
  }
  // Gorodkin's R_K written with explicit sums over the contingency table.
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < gt.size(); ++i) m[gt[i]][pred[i]] += 1;
  double num = 0, a = 0, b = 0;
  for (int x = 0; x < k; ++x) {
    for (int y = 0; y < k; ++y) {
      for (int z = 0; z < k; ++z) num += m[x][x] * m[y][z] - m[x][y] * m[z][x];
    }
  }
  for (int x = 0; x < k; ++x) {
    double row_x = 0, col_x = 0, row_other = 0, col_other = 0;
    for (int y = 0; y < k; ++y) {
      row_x += m[x][y];
      col_x += m[y][x];
    }
    for (int y = 0; y < k; ++y) {
      if (y == x) continue;
      for (int z = 0; z < k; ++z) {
        row_other += m[y][z];
        col_other += m[z][y];
      }
    }
    a += row_x * row_other;
    b += col_x * col_other;
  }
  s.mcc = (a == 0 || b == 0) ? 0.0 : num / std::sqrt(a * b);
  return s;
}

struct Segments {
  double fragmentation = 0, under_fill = 0, over_fill = 0;
};

// Classifies each wrong frame on its own by scanning its runs.
inline Segments two_set(const std::vector<int>& gt, const std::vector<int>& pred, int k) {
  const auto n = static_cast<long>(gt.size());
  std::vector<double> frag(k, 0), under(k, 0), over(k, 0), support(k, 0);
  for (long i = 0; i < n; ++i) support[gt[i]] += 1;
  for (long i = 0; i < n; ++i) {
    const int c = gt[i];
    if (pred[i] != c) {
      bool left = false, right = false;
      for (long j = i - 1; j >= 0 && gt[j] == c; --j) left = left || pred[j] == c;
      for (long j = i + 1; j < n && gt[j] == c; ++j) right = right || pred[j] == c;
      (left && right ? frag : under)[c] += 1;
    }
    const int p = pred[i];
    if (p != gt[i]) {
      long a = i, b = i;
      while (a > 0 && pred[a - 1] == p) --a;
      while (b + 1 < n && pred[b + 1] == p) ++b;
      bool touches = false;
      for (long j = std::max(0L, a - 1); j <= std::min(n - 1, b + 1); ++j) {
        touches = touches || gt[j] == p;
      }
      if (touches) over[p] += 1;
    }
  }
  Segments s;
  const double nn = static_cast<double>(n);
  for (int c = 0; c < k; ++c) {
    s.fragmentation += support[c] / nn * frag[c] / nn;
    s.under_fill += support[c] / nn * under[c] / nn;
    s.over_fill += support[c] / nn * over[c] / nn;
  }
  return s;
}

// ---- phase mixture -------------------------------------------------------------

// Exhaustive argmax of the per-kernel log-likelihood in long double, first
// maximum wins; boundary thresholds as documented.
inline int predict_phase(const procest::PhaseGmm& g, double x) {
  if (g.schema.boundary_start && x < g.eps0) return 0;
  if (g.schema.boundary_end && x > 1.0 - g.eps1) return g.schema.size() - 1;
  int best = -1;
  long double best_score = 0;
  for (int k = 0; k < g.kernel_count(); ++k) {
    const long double w = g.weights[k], mu = g.means[k], sd = g.stds[k], xl = x;
    const long double score = std::log(w) -
                              0.5L * std::log(2.0L * 3.14159265358979323846264338327950288L * sd * sd) -
                              (xl - mu) * (xl - mu) / (2.0L * sd * sd);
    if (best < 0 || score > best_score) {
      best = k;
      best_score = score;
    }
  }
  return best + g.schema.first_interior();
}

// ---- LSTM ---------------------------------------------------------------------

// One step with scalar loops over the stacked [i, f, o, g] gate rows.
inline void lstm_step(const Eigen::MatrixXd& wx, const Eigen::MatrixXd& wh,
                      const Eigen::VectorXd& b, const Eigen::VectorXd& x, std::vector<double>& h,
                      std::vector<double>& c) {
  const auto hidden = static_cast<long>(h.size());
  std::vector<double> pre(4 * hidden);
  for (long r = 0; r < 4 * hidden; ++r) {
    double acc = b(r);
    for (long j = 0; j < x.size(); ++j) acc += wx(r, j) * x(j);
    for (long j = 0; j < hidden; ++j) acc += wh(r, j) * h[j];
    pre[r] = acc;
  }
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (long u = 0; u < hidden; ++u) {
    const double ig = sig(pre[u]);
    const double fg = sig(pre[hidden + u]);
    const double og = sig(pre[2 * hidden + u]);
    const double gg = std::tanh(pre[3 * hidden + u]);
    c[u] = fg * c[u] + ig * gg;
    h[u] = og * std::tanh(c[u]);
  }
}

// ---- finite differences -----------------------------------------------------------

// Central differences of f over every entry of a parameter block.
inline Eigen::VectorXd central_difference(const procest::nn::ParamBlock<double>& block,
                                          const std::function<double()>& f, double step = 1e-5) {
  Eigen::VectorXd g(block.size);
  for (Eigen::Index i = 0; i < block.size; ++i) {
    const double keep = block.data[i];
    block.data[i] = keep + step;
    const double up = f();
    block.data[i] = keep - step;
    const double down = f();
    block.data[i] = keep;
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / scale;
}

// ---- whole-model loss in long double ------------------------------------------------

inline long double act_ld(procest::nn::Activation a, long double z) {
  switch (a) {
    case procest::nn::Activation::kIdentity: return z;
    case procest::nn::Activation::kRelu: return z > 0 ? z : 0;
    case procest::nn::Activation::kRtanh: return z > 0 ? std::tanh(z) : 0;
    case procest::nn::Activation::kSigmoid: return 1 / (1 + std::exp(-z));
  }
  return z;
}

using VecL = std::vector<long double>;

inline VecL dense_ld(const procest::nn::DenseLayer<double>& l, const VecL& x) {
  VecL out(static_cast<std::size_t>(l.W.rows()));
  for (Eigen::Index r = 0; r < l.W.rows(); ++r) {
    long double acc = l.b(r);
    for (Eigen::Index c = 0; c < l.W.cols(); ++c) acc += static_cast<long double>(l.W(r, c)) * x[c];
    out[r] = act_ld(l.activation, acc);
  }
  return out;
}

// Encoder, LSTM, fc1, fc2, output neuron, causal smoothing, then
// alpha * mean |s - label| + beta * mean conditional loss, recomputed from the
// definitions with every intermediate in long double.
inline long double training_loss(const procest::ProgressRegressor& m, const Eigen::MatrixXd& features,
                                 const std::vector<double>& labels, const std::vector<int>& phases,
                                 const procest::PhaseGmm& g, double alpha, double beta) {
  const auto hidden = static_cast<std::size_t>(m.config().lstm_hidden);
  const auto n = static_cast<std::size_t>(features.cols());
  VecL h(hidden, 0), c(hidden, 0), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    VecL x(static_cast<std::size_t>(features.rows()));
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = features(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
    for (const auto& layer : m.encoder) x = dense_ld(layer, x);
    VecL pre(4 * hidden);
    for (std::size_t r = 0; r < 4 * hidden; ++r) {
      long double acc = m.lstm.b(static_cast<Eigen::Index>(r));
      for (std::size_t j = 0; j < x.size(); ++j) acc += static_cast<long double>(m.lstm.Wx(r, j)) * x[j];
      for (std::size_t j = 0; j < hidden; ++j) acc += static_cast<long double>(m.lstm.Wh(r, j)) * h[j];
      pre[r] = acc;
    }
    for (std::size_t u = 0; u < hidden; ++u) {
      const long double ig = 1 / (1 + std::exp(-pre[u]));
      const long double fg = 1 / (1 + std::exp(-pre[hidden + u]));
      const long double og = 1 / (1 + std::exp(-pre[2 * hidden + u]));
      const long double gg = std::tanh(pre[3 * hidden + u]);
      c[u] = fg * c[u] + ig * gg;
      h[u] = og * std::tanh(c[u]);
    }
    y[i] = dense_ld(m.out, dense_ld(m.fc2, dense_ld(m.fc1, h)))[0];
  }
  const long double sigma = m.config().smooth_sigma;
  const int radius = m.config().smooth_radius;
  long double mae = 0, phase = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double num = 0, den = 0;
    for (int j = 0; j <= radius && static_cast<std::size_t>(j) <= i; ++j) {
      const long double k = std::exp(-static_cast<long double>(j) * j / (2 * sigma * sigma));
      num += k * y[i - static_cast<std::size_t>(j)];
      den += k;
    }
    const long double s = num / den;
    mae += std::fabs(s - labels[i]);
    const int kernel = phases[i] - g.schema.first_interior();
    if (g.schema.is_boundary(phases[i])) continue;
    if (oracle::predict_phase(g, static_cast<double>(s)) != phases[i]) {
      phase += std::fabs(s - static_cast<long double>(g.means[static_cast<std::size_t>(kernel)]));
    }
  }
  return alpha * mae / n + beta * phase / n;
}

// Central differences of a long-double objective, dividing by the step that
// was actually applied to the double parameter.
inline Eigen::VectorXd central_difference_ld(const procest::nn::ParamBlock<double>& block,
                                             const std::function<long double()>& f,
                                             double step = 1e-5) {
  Eigen::VectorXd g(block.size);
  for (Eigen::Index i = 0; i < block.size; ++i) {
    const double keep = block.data[i];
    block.data[i] = keep + step;
    const long double up = f();
    const long double hi = block.data[i];
    block.data[i] = keep - step;
    const long double down = f();
    const long double lo = block.data[i];
    block.data[i] = keep;
    g(i) = static_cast<double>((up - down) / (hi - lo));
  }
  return g;
}

// ---- small fixtures -----------------------------------------------------------------

// A trace with explicit per-frame phases, unit frame spacing and random features.
inline procest::ProcessTrace make_trace(const std::string& id, const procest::PhaseSchema& schema,
                                        const std::vector<int>& phases, Eigen::Index features,
                                        std::uint64_t seed) {
  procest::ProcessTrace t;
  t.id = id;
  t.schema = schema;
  const auto n = static_cast<Eigen::Index>(phases.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  t.features.resize(features, n);
  for (Eigen::Index i = 0; i < t.features.size(); ++i) t.features.data()[i] = noise(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.timestamps.push_back(static_cast<double>(i));
    if (i == 0 || phases[i] != phases[i - 1]) t.phase_marks.push_back({phases[i], i});
  }
  t.duration_s = static_cast<double>(n - 1);
  return t;
}

inline procest::PhaseSchema schema_of(int k, bool boundary_start, bool boundary_end) {
  procest::PhaseSchema s;
  for (int i = 0; i < k; ++i) s.phases.push_back("p" + std::to_string(i));
  s.boundary_start = boundary_start;
  s.boundary_end = boundary_end;
  return s;
}

}  // namespace oracle
