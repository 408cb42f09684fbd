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

#include "procest/error.hpp"
#include "procest/simulator.hpp"
#include "procest/trace.hpp"

using namespace procest;

TEST(Simulator, ZeroNoiseFramesSitOnTwoDistinctMeans) {
  auto cfg = SimulatorConfig::with_defaults(2, 4, 9, 5);
  cfg.noise_std = 0.0;
  cfg.emission_separation = 1.0;
  const Eigen::MatrixXd means = phase_emission_means(cfg);
  EXPECT_NEAR((means.col(0) - means.col(1)).norm(), 1.0, 1e-12);
  for (const auto& t : generate_dataset(cfg)) {
    const auto phases = t.frame_phases();
    for (Eigen::Index i = 0; i < t.num_frames(); ++i) {
      const Eigen::VectorXd x = t.features.col(i);
      EXPECT_EQ((x - means.col(phases[i])).cwiseAbs().maxCoeff(), 0.0);
      const int nearest = (x - means.col(0)).norm() <= (x - means.col(1)).norm() ? 0 : 1;
      EXPECT_EQ(nearest, phases[i]);
    }
  }
}

TEST(Simulator, SameConfigIsBitIdentical) {
  const auto cfg = SimulatorConfig::with_defaults(6, 8, 21, 6);
  const auto a = generate_dataset(cfg);
  const auto b = generate_dataset(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i] == b[i]);
}

TEST(Simulator, DifferentSeedsDiffer) {
  const auto a = generate_dataset(SimulatorConfig::with_defaults(4, 3, 1, 1));
  const auto b = generate_dataset(SimulatorConfig::with_defaults(4, 3, 2, 1));
  EXPECT_FALSE(a[0] == b[0]);
}

TEST(Simulator, TracesSatisfyInvariants) {
  for (int k = 2; k <= 8; ++k) {
    auto cfg = SimulatorConfig::with_defaults(k, 3, static_cast<std::uint64_t>(k), 10);
    cfg.frame_rate = 0.5 * k;
    for (const auto& t : generate_dataset(cfg)) {
      EXPECT_NO_THROW(t.validate());
      EXPECT_EQ(static_cast<int>(t.phase_marks.size()), k);
      EXPECT_DOUBLE_EQ(t.duration_s, t.timestamps.back());
      for (std::size_t i = 0; i < t.timestamps.size(); ++i) {
        EXPECT_DOUBLE_EQ(t.timestamps[i], static_cast<double>(i) / cfg.frame_rate);
      }
    }
  }
}

TEST(Simulator, MoreMeansThanFeaturesKeepMinimumSeparation) {
  auto cfg = SimulatorConfig::with_defaults(6, 2, 4, 1);
  cfg.emission_separation = 3.0;
  const Eigen::MatrixXd means = phase_emission_means(cfg);
  double min_dist = 1e300;
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) min_dist = std::min(min_dist, (means.col(a) - means.col(b)).norm());
  }
  EXPECT_NEAR(min_dist, 3.0, 1e-12);
}

TEST(Simulator, EmpiricalPhaseDurationsMatchConfiguredMeans) {
  // 1000 traces; law of large numbers puts each mean within 5%.
  for (auto cfg : {SimulatorConfig::with_defaults(6, 1, 31, 1000),
                   SimulatorConfig::resuscitation_like(31, 1000, 1)}) {
    const auto traces = generate_dataset(cfg);
    std::vector<double> sum(static_cast<std::size_t>(cfg.num_phases), 0.0);
    for (const auto& t : traces) {
      const auto d = phase_durations(t, cfg.frame_rate);
      for (std::size_t k = 0; k < d.size(); ++k) sum[k] += d[k];
    }
    for (std::size_t k = 0; k < sum.size(); ++k) {
      const double mean = sum[k] / static_cast<double>(traces.size());
      EXPECT_NEAR(mean, cfg.phase_duration_means[k], 0.05 * cfg.phase_duration_means[k])
          << "phase " << k;
    }
  }
}

TEST(Simulator, ResuscitationPhasesOccupyOrderedCompletenessSpans) {
  const auto cfg = SimulatorConfig::resuscitation_like(5, 1000, 1);
  const auto traces = generate_dataset(cfg);
  const int k = cfg.num_phases;
  // Median start/end completeness of each phase.
  std::vector<std::vector<double>> starts(k), ends(k);
  for (const auto& t : traces) {
    for (std::size_t m = 0; m < t.phase_marks.size(); ++m) {
      const double s = t.timestamps[static_cast<std::size_t>(t.phase_marks[m].frame)] / t.duration_s;
      const auto last = m + 1 < t.phase_marks.size() ? t.phase_marks[m + 1].frame - 1
                                                     : t.num_frames() - 1;
      starts[m].push_back(s);
      ends[m].push_back(t.timestamps[static_cast<std::size_t>(last)] / t.duration_s);
    }
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  double prev_end = -1.0;
  for (int p = 0; p < k; ++p) {
    const double s = median(starts[p]), e = median(ends[p]);
    EXPECT_LE(s, e);
    EXPECT_GT(s, prev_end) << "phase " << p;
    prev_end = e;
  }
}

TEST(Simulator, ConfigValidation) {
  EXPECT_THROW(SimulatorConfig::with_defaults(1).validate(), UsageError);
  auto cfg = SimulatorConfig::with_defaults(3);
  cfg.phase_duration_means[1] = -1.0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = SimulatorConfig::with_defaults(3);
  cfg.feature_dim = 0;
  EXPECT_THROW(cfg.validate(), UsageError);
  cfg = SimulatorConfig::with_defaults(3);
  cfg.noise_std = -0.1;
  EXPECT_THROW(cfg.validate(), UsageError);
}

TEST(Simulator, BoundaryPhasesOnlyForThreeOrMore) {
  EXPECT_FALSE(SimulatorConfig::with_defaults(2).schema().boundary_start);
  const auto s = SimulatorConfig::with_defaults(4).schema();
  EXPECT_TRUE(s.boundary_start);
  EXPECT_TRUE(s.boundary_end);
  EXPECT_EQ(s.interior_count(), 2);
}
