#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmocp/conformal.hpp"
#include "gmocp/stream.hpp"

namespace gmocp {

enum class Method { gmocp, mocp, single };

std::string method_name(Method method);
Method parse_method(const std::string& name);

struct RunConfig {
  Method method = Method::gmocp;
  int model_index = 0;        // used by Method::single
  double alpha_target = 0.1;  // desired miscoverage, in (0,1)
  double eta = 0.05;          // SF-OGD learning rate
  double epsilon = 0.2;       // multiplicative-weights step size
  double eta_e = 0.05;        // graph exploration rate
  int n_trials = 1;           // N, draws per selective node
  int n_selective = 1;        // J, selective nodes
  ScoreParams score;
  int warmup = 50;            // labeled steps excluded from metrics
  std::uint64_t seed = 0;
};

struct StepOutcome {
  std::int64_t t = 0;  // 1-based, warmup included
  std::uint32_t chosen_model = 0;
  std::uint32_t set_size = 0;
  bool covered = false;
  std::uint32_t updates_performed = 0;
  double alpha_of_chosen = 0.0;  // adaptive miscoverage used to build the set
};

struct RunReport {
  double coverage = 0.0;   // mean covered over post-warmup steps
  double avg_width = 0.0;  // mean set size over post-warmup steps
  double runtime_seconds = 0.0;
  std::int64_t updates_total = 0;  // all steps, warmup included
  std::vector<StepOutcome> per_step;
  RunConfig config;
};

// Final per-model quantities, exposed for tests and diagnostics.
struct RunDebug {
  std::vector<double> final_weights;
  std::vector<double> final_alphas;
  std::vector<std::size_t> history_sizes;
};

// Graph-structured run: per step a bipartite graph restricts both the model
// choice and the parameter updates to the chosen node's candidate set, with
// importance-weighted losses compensating for partial feedback.
RunReport gmocp_run(const Stream& stream, const RunConfig& config, RunDebug* debug = nullptr);

// Full-pool baseline: samples from all models by weight and updates every
// model's miscoverage and weight with its raw pinball loss each step.
RunReport mocp_run(const Stream& stream, const RunConfig& config, RunDebug* debug = nullptr);

// Single fixed model with the adaptive-miscoverage update only.
RunReport single_run(const Stream& stream, const RunConfig& config, RunDebug* debug = nullptr);

RunReport run(const Stream& stream, const RunConfig& config, RunDebug* debug = nullptr);

struct Metrics {
  double coverage = 0.0;
  double avg_width = 0.0;
  double runtime_seconds = 0.0;
};

// Recomputes coverage and width from the per-step log (post-warmup steps).
Metrics evaluate(const RunReport& report);

}  // namespace gmocp
