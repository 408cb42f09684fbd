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

// procest: simulate, train, eval and infer from one binary.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "procest/config.hpp"
#include "procest/error.hpp"
#include "procest/inference.hpp"
#include "procest/model_io.hpp"
#include "procest/pipeline.hpp"
#include "procest/simulator.hpp"
#include "procest/trace.hpp"
#include "procest/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace procest;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct SimulateArgs {
  std::string config, out, preset = "default";
  std::optional<std::uint64_t> seed;
  std::optional<int> cases, phases, features;
  std::optional<double> separation, noise, frame_rate;
};

struct TrainArgs {
  std::string config, data, out, activation;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, beta, test_fraction;
  std::optional<int> epochs;
  bool compare = false;
  int compare_seeds = 5;
  double tolerance = 0.01;
  bool quiet = false;
};

struct EvalArgs {
  std::string config, model, data, split, out;
  std::optional<int> threads, epochs;
  std::optional<std::uint64_t> seed;
  bool sweep = false;
};

struct InferArgs {
  std::string model;
  bool header = false;
  std::optional<double> rho_min;
};

RunConfig base_config(const std::string& path) {
  RunConfig rc;
  if (!path.empty()) read_json_file(path).get_to(rc);
  return rc;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create directory '" + dir.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<ProcessTrace> load_checked(const fs::path& dir) {
  auto traces = load_dataset(dir);
  for (const auto& t : traces) {
    if (!(t.schema == traces.front().schema) || t.feature_dim() != traces.front().feature_dim()) {
      throw DataError("trace '" + t.id + "' does not share the dataset's schema and feature width");
    }
  }
  return traces;
}

std::vector<ProcessTrace> select(const std::vector<ProcessTrace>& all,
                                 const std::vector<std::string>& ids) {
  std::map<std::string, const ProcessTrace*> by_id;
  for (const auto& t : all) by_id[t.id] = &t;
  std::vector<ProcessTrace> out;
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("split names unknown trace '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

json ids_of(const std::vector<ProcessTrace>& traces) {
  json ids = json::array();
  for (const auto& t : traces) ids.push_back(t.id);
  return ids;
}

// ---- simulate ---------------------------------------------------------------

int run_simulate(const SimulateArgs& a) {
  RunConfig rc = base_config(a.config);
  SimulatorConfig& sim = rc.simulator;
  if (a.seed) rc.seed = *a.seed;
  const std::uint64_t seed = a.seed ? *a.seed : sim.seed;
  const int cases = a.cases.value_or(sim.num_traces);
  const int features = a.features.value_or(sim.feature_dim);
  if (a.preset == "resuscitation") {
    sim = SimulatorConfig::resuscitation_like(seed, cases, features);
  } else if (a.preset != "default") {
    throw UsageError("unknown preset '" + a.preset + "'");
  }
  if (a.phases && *a.phases != sim.num_phases) {
    SimulatorConfig fresh = SimulatorConfig::with_defaults(*a.phases, features, seed, cases);
    fresh.frame_rate = sim.frame_rate;
    fresh.emission_separation = sim.emission_separation;
    fresh.noise_std = sim.noise_std;
    sim = fresh;
  }
  sim.seed = seed;
  sim.num_traces = cases;
  sim.feature_dim = features;
  if (a.separation) sim.emission_separation = *a.separation;
  if (a.noise) sim.noise_std = *a.noise;
  if (a.frame_rate) sim.frame_rate = *a.frame_rate;
  sim.validate();

  const auto traces = generate_dataset(sim);
  const fs::path out(a.out);
  save_dataset(traces, out);
  write_json_file(out / "manifest.json", json{{"format", "procest-dataset"},
                                              {"version", 1},
                                              {"simulator", sim},
                                              {"traces", ids_of(traces)}});
  write_json_file(out / "config.json", rc);
  std::cout << "wrote " << traces.size() << " traces to " << out.string() << "\n";
  return kOk;
}

// ---- train ------------------------------------------------------------------

struct Prepared {
  RunConfig rc;
  DatasetSplit split;
  PhaseGmm gmm;
};

Prepared prepare(RunConfig rc, const std::string& data) {
  const auto traces = load_checked(data);
  if (traces.size() < 2) throw DataError("need at least 2 traces to split");
  rc.model.feature_dim = static_cast<int>(traces.front().feature_dim());
  rc.model.validate();
  rc.train.validate();
  Prepared p{rc, split_dataset(traces, rc.test_fraction, rc.seed), {}};
  p.gmm = fit_gmm(p.split.train, rc.gmm);
  return p;
}

json comparison_json(const ActivationRun& r) {
  return json{{"convergence_epoch", r.convergence_epoch},
              {"epochs_trained", r.epochs_trained},
              {"final_mae", r.final_mae},
              {"prestart_mean", r.prestart_mean},
              {"mae_by_epoch", r.mae_by_epoch}};
}

int run_compare(const Prepared& p, const TrainArgs& a, const fs::path& out) {
  json runs = json::array();
  std::printf("seed  rtanh_epochs  sigmoid_epochs  rtanh_mae  sigmoid_mae\n");
  for (int s = 1; s <= a.compare_seeds; ++s) {
    TrainConfig tc = p.rc.train;
    tc.seed = p.rc.train.seed + static_cast<std::uint64_t>(s);
    const auto cmp = compare_activations(p.split.train, p.split.test, p.gmm, p.rc.model, tc,
                                         p.rc.seed + static_cast<std::uint64_t>(s), a.tolerance);
    std::printf("%-4d  %-12d  %-14d  %-9.4f  %.4f\n", s, cmp.rtanh.convergence_epoch,
                cmp.sigmoid.convergence_epoch, cmp.rtanh.final_mae, cmp.sigmoid.final_mae);
    std::fflush(stdout);
    runs.push_back({{"seed", s}, {"rtanh", comparison_json(cmp.rtanh)},
                    {"sigmoid", comparison_json(cmp.sigmoid)}});
  }
  write_json_file(out / "comparison.json",
                  json{{"format", "procest-activation-comparison"},
                       {"version", 1},
                       {"tolerance", a.tolerance},
                       {"runs", std::move(runs)}});
  write_json_file(out / "config.json", p.rc);
  return kOk;
}

int run_train(const TrainArgs& a) {
  RunConfig rc = base_config(a.config);
  if (a.seed) rc.seed = rc.train.seed = *a.seed;
  if (a.alpha) rc.train.weights.alpha = *a.alpha;
  if (a.beta) rc.train.weights.beta = *a.beta;
  if (a.epochs) rc.train.max_epochs = *a.epochs;
  if (a.test_fraction) rc.test_fraction = *a.test_fraction;
  if (!a.activation.empty()) rc.model.output = nn::parse_activation(a.activation);

  const Prepared p = prepare(rc, a.data);
  const fs::path out(a.out);
  ensure_dir(out);
  if (a.compare) return run_compare(p, a, out);

  auto result = train(ProgressRegressor(p.rc.model, p.rc.seed), p.split.train, p.gmm, p.rc.train,
                      [&](const EpochLog& e, const ProgressRegressor&) {
                        if (a.quiet) return;
                        std::fprintf(stderr, "epoch %3d  cases %3d  loss %.6f\n", e.epoch,
                                     e.active_cases, e.total_loss);
                      });

  const auto& w = p.rc.train.weights;
  std::string csv = "epoch,active_cases,loss_c,loss_p,alpha,beta,weighted_loss_c,weighted_loss_p,total\n";
  for (const auto& e : result.log) {
    char line[256];
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.epoch,
                  e.active_cases, e.completeness_loss, e.phase_loss, w.alpha, w.beta,
                  w.alpha * e.completeness_loss, w.beta * e.phase_loss, e.total_loss);
    csv += line;
  }
  write_text(out / "train_log.csv", csv);

  const json split = {{"seed", p.rc.seed},
                      {"test_fraction", p.rc.test_fraction},
                      {"train", ids_of(p.split.train)},
                      {"test", ids_of(p.split.test)}};
  write_json_file(out / "split.json", split);
  write_json_file(out / "config.json", p.rc);
  ModelBundle bundle{result.model, p.gmm,
                     json{{"config", p.rc},
                          {"split", split},
                          {"epochs", result.log.size()},
                          {"early_stopped", result.early_stopped}}};
  save_model(bundle, out / "model.json");
  std::cout << "trained " << result.log.size() << " epochs"
            << (result.early_stopped ? " (early stop)" : "") << ", model at "
            << (out / "model.json").string() << "\n";
  return kOk;
}

// ---- eval -------------------------------------------------------------------

int run_sweep(const EvalArgs& a) {
  RunConfig rc = base_config(a.config);
  if (!a.model.empty()) {
    const auto bundle = load_model(a.model);
    if (bundle.metadata.contains("config")) bundle.metadata.at("config").get_to(rc);
  }
  if (a.seed) rc.seed = rc.train.seed = *a.seed;
  if (a.epochs) rc.train.max_epochs = *a.epochs;
  if (a.threads) rc.threads = *a.threads;
  const Prepared p = prepare(rc, a.data);
  const auto rows = sweep_alpha_beta(p.split.train, p.split.test, p.gmm, p.rc.model, p.rc.seed,
                                     p.rc.train, p.rc.rho_min, p.rc.threads);
  const fs::path out(a.out);
  ensure_dir(out);
  write_json_file(out / "sweep.json", to_json(rows));
  const auto table = format_sweep_table(rows);
  write_text(out / "sweep.txt", table);
  write_json_file(out / "config.json", p.rc);
  std::cout << table;
  return kOk;
}

int run_eval(const EvalArgs& a) {
  if (a.sweep) return run_sweep(a);
  if (a.model.empty()) throw UsageError("eval needs --model (or --sweep-alpha-beta)");
  const auto bundle = load_model(a.model);
  RunConfig rc;
  if (bundle.metadata.contains("config")) bundle.metadata.at("config").get_to(rc);
  if (!a.config.empty()) read_json_file(a.config).get_to(rc);
  if (a.threads) rc.threads = *a.threads;

  auto traces = load_checked(a.data);
  if (!a.split.empty()) {
    const auto split = read_json_file(a.split);
    traces = select(traces, split.at("test").get<std::vector<std::string>>());
  }
  const auto report = evaluate_dataset(bundle.regressor, bundle.gmm, traces, rc.rho_min, rc.threads);
  const fs::path out(a.out);
  ensure_dir(out);
  write_json_file(out / "report.json", to_json(report));
  const auto table = format_report_table(report);
  write_text(out / "report.txt", table);
  write_json_file(out / "config.json", json{{"model", a.model},
                                            {"data", a.data},
                                            {"split", a.split},
                                            {"rho_min", rc.rho_min},
                                            {"run", rc}});
  std::cout << table;
  return kOk;
}

// ---- infer ------------------------------------------------------------------

int run_infer(const InferArgs& a) {
  const auto bundle = load_model(a.model);
  double rho_min = kDefaultMinCompleteness;
  if (bundle.metadata.contains("config")) {
    rho_min = bundle.metadata.at("config").value("rho_min", rho_min);
  }
  if (a.rho_min) rho_min = *a.rho_min;
  const Eigen::Index width = bundle.regressor.config().feature_dim;
  OnlineEstimator est(bundle.regressor, bundle.gmm, rho_min);

  std::string line;
  std::size_t line_no = 0;
  bool header_pending = a.header;
  while (std::getline(std::cin, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (header_pending) {
      const auto h = parse_trace_header(line, line_no);
      if (h.feature_dim != width) {
        throw DataError("line " + std::to_string(line_no) + ": trace has " +
                        std::to_string(h.feature_dim) + " features, model expects " +
                        std::to_string(width));
      }
      if (!(h.schema == bundle.gmm.schema)) {
        throw DataError("line " + std::to_string(line_no) + ": phase schema does not match the model");
      }
      header_pending = false;
      continue;
    }
    const auto frame = parse_frame_line(line, width, line_no);
    std::cout << format_report_line(est.step(frame)) << '\n' << std::flush;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Progress and phase estimation for linear sequential processes"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--config", sa.config, "Run config JSON");
  sim->add_option("--out", sa.out, "Output directory")->required();
  sim->add_option("--seed", sa.seed);
  sim->add_option("--cases", sa.cases, "Number of traces");
  sim->add_option("--phases", sa.phases, "Number of phases (>= 2)");
  sim->add_option("--features", sa.features, "Feature dimension");
  sim->add_option("--separation", sa.separation, "Distance between phase emission means");
  sim->add_option("--noise", sa.noise, "Per-feature noise std");
  sim->add_option("--frame-rate", sa.frame_rate, "Frames per second");
  sim->add_option("--preset", sa.preset, "default | resuscitation");

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Fit the phase mixture and train the regressor");
  tr->add_option("--config", ta.config, "Run config JSON");
  tr->add_option("--data", ta.data, "Dataset directory")->required();
  tr->add_option("--out", ta.out, "Output directory")->required();
  tr->add_option("--seed", ta.seed);
  tr->add_option("--alpha", ta.alpha, "Weight of the completeness loss");
  tr->add_option("--beta", ta.beta, "Weight of the phase loss");
  tr->add_option("--activation", ta.activation, "Output neuron: rtanh | sigmoid");
  tr->add_option("--epochs", ta.epochs, "Maximum epochs");
  tr->add_option("--test-fraction", ta.test_fraction);
  tr->add_flag("--compare-activations", ta.compare, "Paired rtanh vs sigmoid runs");
  tr->add_option("--compare-seeds", ta.compare_seeds, "Seeds for --compare-activations");
  tr->add_option("--tolerance", ta.tolerance, "Held-out MAE change counted as converged");
  tr->add_flag("--quiet", ta.quiet, "No per-epoch progress on stderr");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Evaluate a model, or sweep alpha/beta");
  ev->add_option("--config", ea.config, "Run config JSON");
  ev->add_option("--model", ea.model, "Model file");
  ev->add_option("--data", ea.data, "Dataset directory")->required();
  ev->add_option("--split", ea.split, "split.json from train; evaluates its test ids");
  ev->add_option("--out", ea.out, "Output directory")->required();
  ev->add_option("--threads", ea.threads, "Worker threads (default PROCEST_THREADS)");
  ev->add_option("--seed", ea.seed, "Sweep seed");
  ev->add_option("--epochs", ea.epochs, "Sweep maximum epochs");
  ev->add_flag("--sweep-alpha-beta", ea.sweep, "Train and score alpha = 0, 0.2, ..., 1");

  InferArgs ia;
  auto* inf = app.add_subcommand("infer", "Stream frames on stdin, reports on stdout");
  inf->add_option("--model", ia.model, "Model file")->required();
  inf->add_flag("--header", ia.header, "First input line is a trace header");
  inf->add_option("--rho-min", ia.rho_min, "Completeness below which remaining time is unknown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return run_simulate(sa);
    if (*tr) return run_train(ta);
    if (*ev) return run_eval(ea);
    return run_infer(ia);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
}
