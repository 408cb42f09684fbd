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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "procest/error.hpp"
#include "procest/gmm.hpp"
#include "procest/objective.hpp"
#include "procest/regressor.hpp"
#include "procest/simulator.hpp"
#include "procest/trainer.hpp"

namespace {

using namespace procest;

PhaseGmm two_kernel(double w0, double w1, double m0, double m1, double s0, double s1) {
  PhaseGmm g;
  g.schema = oracle::schema_of(2, false, false);
  g.weights = {w0, w1};
  g.means = {m0, m1};
  g.stds = {s0, s1};
  return g;
}

RegressorConfig small_config(Eigen::Index features) {
  RegressorConfig c;
  c.feature_dim = features;
  c.encoder_dim = 8;
  c.lstm_hidden = 8;
  c.fc1_dim = 8;
  c.fc2_dim = 8;
  return c;
}

// ---- regressor -------------------------------------------------------------------

TEST(Regressor, ZeroModelOutputsZero) {
  auto cfg = small_config(5);
  const ProgressRegressor model = ProgressRegressor::zeros(cfg);
  const auto t = oracle::make_trace("z", oracle::schema_of(3, false, false), {0, 0, 1, 1, 2, 2, 2}, 5, 1);
  for (double y : model.forward(t)) EXPECT_EQ(y, 0.0);
}

TEST(Regressor, RadiusZeroGivesRawOutput) {
  auto cfg = small_config(4);
  cfg.smooth_radius = 0;
  const ProgressRegressor model(cfg, 3);
  const auto t = oracle::make_trace("r", oracle::schema_of(2, false, false), std::vector<int>(20, 0), 4, 2);
  EXPECT_EQ(model.forward(t), model.forward_raw(t.features));
}

TEST(Regressor, OutputsStayInUnitInterval) {
  for (auto act : {nn::Activation::kRtanh, nn::Activation::kSigmoid}) {
    auto cfg = small_config(6);
    cfg.output = act;
    const ProgressRegressor model(cfg, 17);
    const auto t = oracle::make_trace("u", oracle::schema_of(2, false, false), std::vector<int>(50, 1), 6, 8);
    for (double y : model.forward(t)) {
      EXPECT_GE(y, 0.0);
      EXPECT_LT(y, 1.0);
    }
  }
}

TEST(Regressor, DimensionMismatchRaises) {
  const ProgressRegressor model(small_config(4), 1);
  const auto t = oracle::make_trace("d", oracle::schema_of(2, false, false), {0, 1}, 5, 1);
  EXPECT_THROW(model.forward(t), UsageError);
}

TEST(Regressor, ConfigValidation) {
  auto cfg = small_config(4);
  cfg.encoder_layers = 3;
  EXPECT_THROW(ProgressRegressor(cfg, 1), UsageError);
  cfg = small_config(4);
  cfg.output = nn::Activation::kRelu;
  EXPECT_THROW(ProgressRegressor(cfg, 1), UsageError);
  cfg = small_config(0);
  EXPECT_THROW(ProgressRegressor(cfg, 1), UsageError);
}

TEST(Regressor, InitIsSeeded) {
  ProgressRegressor a(small_config(4), 5), b(small_config(4), 5), c(small_config(4), 6);
  EXPECT_EQ(a.lstm.Wx, b.lstm.Wx);
  EXPECT_NE(a.lstm.Wx, c.lstm.Wx);
  EXPECT_EQ(a.out.b(0), 0.5);
  EXPECT_EQ(a.lstm.b.segment(8, 8), Eigen::VectorXd::Ones(8));
}

// ---- mixture ---------------------------------------------------------------------

TEST(Gmm, UniformHalves) {
  // Two interior phases each covering half of every sequence.
  std::vector<LabeledSequence> data;
  for (int t = 0; t < 3; ++t) {
    LabeledSequence s;
    for (int i = 1; i <= 9; ++i) {
      s.labels.push_back(0.05 * i);
      s.phases.push_back(0);
    }
    for (int i = 11; i <= 19; ++i) {
      s.labels.push_back(0.05 * i);
      s.phases.push_back(1);
    }
    data.push_back(s);
  }
  const auto g = fit_gmm(data, oracle::schema_of(2, false, false));
  EXPECT_NEAR(g.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(g.weights[1], 0.5, 1e-15);
  EXPECT_NEAR(g.means[0], 0.25, 1e-12);
  EXPECT_NEAR(g.means[1], 0.75, 1e-12);
  EXPECT_NEAR(g.stds[0], g.stds[1], 1e-12);
}

TEST(Gmm, SingleTraceMean) {
  LabeledSequence s{{0.0, 0.1, 0.30, 0.35, 0.40, 0.9, 1.0}, {0, 1, 2, 2, 2, 3, 4}};
  const auto g = fit_gmm(std::vector{s}, oracle::schema_of(5, true, true));
  ASSERT_EQ(g.kernel_count(), 3);
  EXPECT_NEAR(g.means[1], 0.35, 1e-15);
  EXPECT_NEAR(g.weights[1], 3.0 / 5.0, 1e-15);
  EXPECT_NEAR(g.stds[1], std::sqrt(2.0 * 0.05 * 0.05 / 3.0), 1e-15);
  EXPECT_EQ(g.stds[0], PhaseGmm::kMinStd);
}

TEST(Gmm, TiedAndEqualWeights) {
  LabeledSequence s{{0.1, 0.2, 0.5, 0.7, 0.9}, {0, 0, 1, 1, 1}};
  const auto g = fit_gmm(std::vector{s}, oracle::schema_of(2, false, false),
                         {GmmVariance::kTied, 0.005, 0.005, true});
  EXPECT_EQ(g.weights, (std::vector<double>{0.5, 0.5}));
  const double ss = 2 * 0.05 * 0.05 + 0.2 * 0.2 + 0.0 + 0.2 * 0.2;
  EXPECT_NEAR(g.stds[0], std::sqrt(ss / 5.0), 1e-15);
  EXPECT_EQ(g.stds[0], g.stds[1]);
}

TEST(Gmm, MissingPhaseAndDisorderAreDataErrors) {
  LabeledSequence missing{{0.1, 0.2, 0.9}, {0, 0, 2}};
  EXPECT_THROW(fit_gmm(std::vector{missing}, oracle::schema_of(3, false, false)), DataError);
  LabeledSequence reversed{{0.8, 0.9, 0.1, 0.2}, {0, 0, 1, 1}};
  EXPECT_THROW(fit_gmm(std::vector{reversed}, oracle::schema_of(2, false, false)), DataError);
}

TEST(Gmm, FitsSimulatedTracesInOrder) {
  const auto traces = generate_dataset(SimulatorConfig::with_defaults(6, 4, 3, 40));
  const auto g = fit_gmm(traces);
  ASSERT_EQ(g.kernel_count(), 4);
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    sum += g.weights[k];
    if (k > 0) EXPECT_GT(g.means[k], g.means[k - 1]);
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(PredictPhase, Examples) {
  const auto g = two_kernel(0.5, 0.5, 0.25, 0.75, 0.1, 0.1);
  EXPECT_EQ(predict_phase(g, 0.2), 0);  // first phase
  EXPECT_EQ(predict_phase(g, 0.5), 0);  // exact tie goes to the earlier phase
  EXPECT_EQ(predict_phase(g, 0.5000001), 1);
  EXPECT_THROW(predict_phase(g, 1.2), UsageError);
  EXPECT_THROW(predict_phase(g, -0.1), UsageError);
}

TEST(PredictPhase, UnequalKernels) {
  const auto g = two_kernel(0.3, 0.7, 0.3, 0.6, 0.1, 0.2);
  // log w - log sigma - d^2 / 2 sigma^2 evaluated in long double
  const auto score = [](long double w, long double mu, long double sd, long double x) {
    return std::log(w) - std::log(sd) - (x - mu) * (x - mu) / (2 * sd * sd);
  };
  const int expected = score(0.3L, 0.3L, 0.1L, 0.45L) >= score(0.7L, 0.6L, 0.2L, 0.45L) ? 0 : 1;
  EXPECT_EQ(expected, 1);
  EXPECT_EQ(predict_phase(g, 0.45), expected);
}

TEST(PredictPhase, BoundaryThresholds) {
  PhaseGmm g;
  g.schema = oracle::schema_of(4, true, true);
  g.weights = {0.5, 0.5};
  g.means = {0.3, 0.7};
  g.stds = {0.1, 0.1};
  EXPECT_EQ(predict_phase(g, 0.0), 0);
  EXPECT_EQ(predict_phase(g, 0.0049), 0);
  EXPECT_EQ(predict_phase(g, 0.005), 1);
  EXPECT_EQ(predict_phase(g, 0.995), 2);
  EXPECT_EQ(predict_phase(g, 0.9951), 3);
  EXPECT_EQ(predict_phase(g, 1.0), 3);
}

TEST(PredictPhase, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    PhaseGmm g;
    g.schema = oracle::schema_of(k + 2, rng() % 2 == 0, rng() % 2 == 0);
    if (g.schema.interior_count() != k) {
      g.schema = oracle::schema_of(k + (g.schema.boundary_start ? 1 : 0) + (g.schema.boundary_end ? 1 : 0),
                                   g.schema.boundary_start, g.schema.boundary_end);
    }
    std::vector<double> means(static_cast<std::size_t>(k));
    for (auto& m : means) m = u(rng);
    std::sort(means.begin(), means.end());
    double wsum = 0.0;
    for (int i = 0; i < k; ++i) {
      g.weights.push_back(0.05 + u(rng));
      wsum += g.weights.back();
      g.means.push_back(means[static_cast<std::size_t>(i)]);
      g.stds.push_back(0.01 + 0.3 * u(rng));
    }
    for (auto& w : g.weights) w /= wsum;
    const double x = trial % 10 == 0 ? g.means[rng() % k] : u(rng);
    ASSERT_EQ(predict_phase(g, x), oracle::predict_phase(g, x)) << "trial " << trial;
  }
}

TEST(PredictPhase, EqualKernelsGiveOrderedIntervals) {
  PhaseGmm g;
  g.schema = oracle::schema_of(7, true, true);
  g.means = {0.1, 0.3, 0.45, 0.7, 0.9};
  g.weights.assign(5, 0.2);
  g.stds.assign(5, 0.07);
  int prev = 0;
  for (int i = 0; i <= 100000; ++i) {
    const int p = predict_phase(g, i / 100000.0);
    ASSERT_GE(p, prev);
    ASSERT_LE(p - prev, 1);
    prev = p;
  }
  EXPECT_EQ(prev, 6);
}

// ---- losses ------------------------------------------------------------------------

TEST(ConditionalLoss, Examples) {
  const auto g = two_kernel(0.5, 0.5, 0.2, 0.6, 0.05, 0.05);
  const auto correct = conditional_loss(g, 0.55, 1);
  EXPECT_EQ(correct.value, 0.0);
  EXPECT_EQ(correct.grad, 0.0);
  const auto wrong = conditional_loss(g, 0.35, 1);
  EXPECT_NEAR(wrong.value, 0.25, 1e-15);
  EXPECT_EQ(wrong.grad, -1.0);
  const auto g2 = two_kernel(0.5, 0.5, 0.6, 0.8, 0.05, 0.05);
  const auto l = conditional_loss(g2, 0.4, 1);
  ASSERT_EQ(predict_phase(g2, 0.4), 0);
  EXPECT_NEAR(l.value, 0.4, 1e-15);
  const auto above = conditional_loss(g, 0.7, 0);
  EXPECT_NEAR(above.value, 0.5, 1e-15);
  EXPECT_EQ(above.grad, 1.0);
  EXPECT_THROW(conditional_loss(g, 0.5, 2), UsageError);
}

TEST(ConditionalLoss, MisclassifiedAtOwnMean) {
  // Kernel 0 is so heavy that it wins even at mu_1.
  const auto g = two_kernel(0.999, 0.001, 0.5, 0.55, 0.2, 0.2);
  ASSERT_EQ(predict_phase(g, 0.55), 0);
  const auto l = conditional_loss(g, 0.55, 1);
  EXPECT_EQ(l.value, 0.0);
  EXPECT_EQ(l.grad, 0.0);
}

TEST(ConditionalLoss, ZeroIffCorrect) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto g = two_kernel(0.4, 0.6, 0.3, 0.65, 0.08, 0.12);
  for (int i = 0; i < 5000; ++i) {
    const double x = u(rng);
    for (int p = 0; p < 2; ++p) {
      const bool zero = conditional_loss(g, x, p).value == 0.0;
      ASSERT_EQ(zero, predict_phase(g, x) == p || x == g.means[static_cast<std::size_t>(p)]);
    }
  }
}

TEST(CombinedLoss, Examples) {
  EXPECT_NEAR(combined_loss(0.1, 0.2, {0.6, 0.4}), 0.14, 1e-15);
  EXPECT_EQ(combined_loss(0.3, 0.9, {0.7, 0.0}), 0.7 * 0.3);
  EXPECT_EQ(combined_loss(0.0, 0.0, {0.6, 0.4}), 0.0);
  EXPECT_EQ(combined_loss(0.3, 0.9, {1.0, 0.0}), 0.3);
  EXPECT_EQ(combined_loss(0.3, 0.9, {0.0, 1.0}), 0.9);
  EXPECT_THROW((LossWeights{0.0, 0.0}.validate()), UsageError);
  EXPECT_THROW((LossWeights{-0.1, 1.0}.validate()), UsageError);
}

TEST(CombinedLoss, Linear) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const LossWeights w{u(rng), u(rng)};
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    EXPECT_NEAR(combined_loss(a + c, b + d, w), combined_loss(a, b, w) + combined_loss(c, d, w), 1e-14);
  }
}

// ---- full training step gradient --------------------------------------------------------

TEST(Gradients, FullTrainingStepRtanh) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    EXPECT_LT(gradcheck::training_step(s, nn::Activation::kRtanh), 1e-5) << "seed " << s;
  }
}

TEST(Gradients, FullTrainingStepSigmoid) {
  for (std::uint64_t s = 1; s <= 5; ++s) {
    EXPECT_LT(gradcheck::training_step(s, nn::Activation::kSigmoid), 1e-5) << "seed " << s;
  }
}

TEST(Gradients, TruncatedBpttMatchesFullWindowWhenLongEnough) {
  auto f = gradcheck::step_fixture(3, nn::Activation::kRtanh);
  const TraceTargets targets{&f.features, f.labels, f.phases};
  auto full = ProgressRegressor::zeros(f.model.config());
  auto windowed = ProgressRegressor::zeros(f.model.config());
  trace_loss_and_gradient(f.model, targets, f.gmm, f.weights, {}, &full);
  GradientOptions opt;
  opt.bptt_window = 3;
  trace_loss_and_gradient(f.model, targets, f.gmm, f.weights, opt, &windowed);
  EXPECT_EQ(full.lstm.Wh, windowed.lstm.Wh);
}

// ---- training ---------------------------------------------------------------------------

std::vector<ProcessTrace> zero_noise(int cases, std::uint64_t seed) {
  auto cfg = SimulatorConfig::with_defaults(4, 6, seed, cases);
  cfg.noise_std = 0.0;
  return generate_dataset(cfg);
}

TrainConfig quick(int epochs) {
  TrainConfig c;
  c.max_epochs = epochs;
  c.dropout_rate = 0.0;
  c.adam.learning_rate = 3e-3;
  return c;
}

TEST(Train, LossDecreasesOverFirstEpochs) {
  auto traces = zero_noise(8, 4);
  std::sort(traces.begin(), traces.end(),
            [](const auto& a, const auto& b) { return a.num_frames() < b.num_frames(); });
  traces.resize(2);
  const auto gmm = fit_gmm(traces);
  const auto r = train(ProgressRegressor(small_config(6), 1), traces, gmm, quick(5));
  ASSERT_EQ(r.log.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) EXPECT_LT(r.log[e].total_loss, r.log[e - 1].total_loss);
}

TEST(Train, StagnationStopsAfterPatiencePlusOne) {
  const auto traces = zero_noise(2, 4);
  auto cfg = quick(50);
  cfg.early_stop_delta = 1e9;
  const auto r = train(ProgressRegressor(small_config(6), 1), traces, fit_gmm(traces), cfg);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_EQ(r.log.size(), static_cast<std::size_t>(cfg.early_stop_patience + 1));
}

TEST(Train, CurriculumGrowsFromTwoCases) {
  const auto traces = zero_noise(5, 6);
  auto cfg = quick(40);
  cfg.curriculum_loss_threshold = 1e9;  // every epoch qualifies
  const auto r = train(ProgressRegressor(small_config(6), 1), traces, fit_gmm(traces), cfg);
  ASSERT_GE(r.log.size(), 4u);
  for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(r.log[e].active_cases, static_cast<int>(e) + 2);
  EXPECT_EQ(r.log.back().active_cases, 5);

  cfg.curriculum_loss_threshold = 1e-12;  // never grows
  cfg.max_epochs = 5;
  const auto stuck = train(ProgressRegressor(small_config(6), 1), traces, fit_gmm(traces), cfg);
  for (const auto& e : stuck.log) EXPECT_EQ(e.active_cases, 2);
  EXPECT_FALSE(stuck.early_stopped);
}

TEST(Train, Deterministic) {
  const auto traces = zero_noise(4, 8);
  const auto gmm = fit_gmm(traces);
  auto cfg = quick(6);
  cfg.dropout_rate = 0.2;
  const auto a = train(ProgressRegressor(small_config(6), 2), traces, gmm, cfg);
  const auto b = train(ProgressRegressor(small_config(6), 2), traces, gmm, cfg);
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(a.model.out.W, b.model.out.W);
  EXPECT_EQ(a.model.lstm.Wx, b.model.lstm.Wx);
}

TEST(Train, RejectsBadInput) {
  const auto traces = zero_noise(2, 8);
  const auto gmm = fit_gmm(traces);
  EXPECT_THROW(train(ProgressRegressor(small_config(6), 2), {}, gmm, quick(2)), UsageError);
  EXPECT_THROW(train(ProgressRegressor(small_config(5), 2), traces, gmm, quick(2)), UsageError);
  auto bad = quick(2);
  bad.early_stop_patience = 0;
  EXPECT_THROW(train(ProgressRegressor(small_config(6), 2), traces, gmm, bad), UsageError);
}

TEST(Train, DivergenceIsNumericError) {
  const auto traces = zero_noise(2, 8);
  auto model = ProgressRegressor(small_config(6), 2);
  model.fc1.W(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train(model, traces, fit_gmm(traces), quick(2)), NumericError);
}

TEST(Train, ZeroNoiseTraceIsLearned) {
  const auto traces = zero_noise(9, 10);
  const std::vector<ProcessTrace> train_set(traces.begin(), traces.end() - 1);
  const auto gmm = fit_gmm(train_set);
  auto cfg = quick(120);
  const auto r = train(ProgressRegressor(small_config(6), 3), train_set, gmm, cfg);
  const auto& held = traces.back();
  const auto est = r.model.forward(held);
  const auto labels = label_completeness(held);
  double mae = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) mae += std::abs(est[i] - labels[i]);
  mae /= static_cast<double>(est.size());
  EXPECT_LE(mae, 0.05);
}

// ---- convergence epoch ---------------------------------------------------------------------

TEST(Convergence, SettledBand) {
  EXPECT_EQ(epochs_to_convergence({}, 0.01), 0);
  EXPECT_EQ(epochs_to_convergence({0.5}, 0.01), 1);
  // A transient plateau above the final level does not count.
  const std::vector<double> s{0.3, 0.2, 0.08, 0.08, 0.08, 0.08, 0.05, 0.031, 0.03, 0.03, 0.029};
  EXPECT_EQ(epochs_to_convergence(s, 0.01), 8);
  EXPECT_EQ(epochs_to_convergence(s, 0.06), 3);
  EXPECT_EQ(epochs_to_convergence(std::vector<double>(10, 0.2), 1e-12), 1);
  EXPECT_THROW(epochs_to_convergence(s, 0.01, 0), UsageError);
}

}  // namespace
