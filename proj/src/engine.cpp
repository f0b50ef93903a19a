#include "gmocp/engine.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "gmocp/adaptation.hpp"
#include "gmocp/graph.hpp"
#include "gmocp/rng.hpp"

namespace gmocp {

namespace {

// Weights only decay (losses are nonnegative). multiplicative_update floors
// single-step underflow; the rescale below keeps weight ratios representable
// on long streams. All downstream uses of the weights are scale-invariant.
constexpr double kRescaleThreshold = 1e-150;

void validate_config(const Stream& stream, const RunConfig& config) {
  if (stream.records.empty()) throw std::invalid_argument("run: empty stream");
  if (stream.header.n_models < 1) throw std::invalid_argument("run: stream has no models");
  if (static_cast<std::int64_t>(stream.records.size()) != stream.header.length) {
    throw std::invalid_argument("run: stream record count does not match header");
  }
  if (!(config.alpha_target > 0.0 && config.alpha_target < 1.0)) {
    throw std::invalid_argument("run: alpha_target outside (0,1)");
  }
  if (!(config.eta > 0.0)) throw std::invalid_argument("run: eta must be > 0");
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
    throw std::invalid_argument("run: epsilon outside (0,1)");
  }
  if (!(config.eta_e >= 0.0 && config.eta_e <= 1.0)) {
    throw std::invalid_argument("run: eta_e outside [0,1]");
  }
  if (config.n_trials < 1 || config.n_selective < 1) {
    throw std::invalid_argument("run: N and J must be >= 1");
  }
  if (config.warmup < 0 ||
      static_cast<std::int64_t>(config.warmup) >= stream.header.length) {
    throw std::invalid_argument("run: warmup must be shorter than the stream");
  }
  if (config.method == Method::single &&
      (config.model_index < 0 || config.model_index >= stream.header.n_models)) {
    throw std::invalid_argument("run: model_index out of range");
  }
}

struct Loop {
  const Stream& stream;
  const RunConfig& config;
  std::size_t n_models;
  std::size_t n_labels;
  std::vector<ModelState> models;
  std::vector<double> weights;  // mirror of models[i].weight for span-based ops
  std::mt19937_64 rng_graph;
  std::mt19937_64 rng_node;
  std::mt19937_64 rng_model;
  std::mt19937_64 rng_u;

  Loop(const Stream& s, const RunConfig& c)
      : stream(s),
        config(c),
        n_models(static_cast<std::size_t>(s.header.n_models)),
        n_labels(static_cast<std::size_t>(s.header.n_labels)),
        rng_graph(make_rng(c.seed, RngStream::graph_trials)),
        rng_node(make_rng(c.seed, RngStream::node_choice)),
        rng_model(make_rng(c.seed, RngStream::model_choice)),
        rng_u(make_rng(c.seed, RngStream::score_noise)) {
    models.resize(n_models);
    for (auto& st : models) {
      st.weight = 1.0;
      st.alpha = c.alpha_target;
      st.history.reserve(stream.records.size());
    }
    weights.assign(n_models, 1.0);
  }

  void set_weight(std::size_t m, double w) {
    models[m].weight = w;
    weights[m] = w;
  }

  void rescale_weights_if_needed() {
    const double top = *std::max_element(weights.begin(), weights.end());
    if (top >= kRescaleThreshold) return;
    for (std::size_t m = 0; m < n_models; ++m) set_weight(m, models[m].weight / top);
  }

  // Prediction-set size and coverage for one model at the current step.
  StepOutcome predict(const StreamRecord& rec, std::int64_t t, std::size_t model, double u) {
    ModelState& st = models[model];
    const double qhat = quantile_threshold(st.history, st.alpha, static_cast<std::size_t>(t));
    const auto scores = nonconformity_scores(rec.model_row(model, n_labels), config.score, u);
    StepOutcome out;
    out.t = t;
    out.chosen_model = static_cast<std::uint32_t>(model);
    out.alpha_of_chosen = st.alpha;
    for (std::size_t lbl = 0; lbl < scores.size(); ++lbl) {
      if (scores[lbl] <= qhat) {
        ++out.set_size;
        if (lbl == static_cast<std::size_t>(rec.label)) out.covered = true;
      }
    }
    return out;
  }

  double true_label_score(const StreamRecord& rec, std::size_t model, double u) const {
    return nonconformity_score(rec.model_row(model, n_labels),
                               static_cast<std::size_t>(rec.label), config.score, u);
  }

  void append_histories(std::span<const double> true_scores) {
    for (std::size_t m = 0; m < n_models; ++m) models[m].history.insert(true_scores[m]);
  }

  void finalize(RunReport& report, RunDebug* debug) const {
    if (debug != nullptr) {
      debug->final_weights.clear();
      debug->final_alphas.clear();
      debug->history_sizes.clear();
      for (const auto& st : models) {
        debug->final_weights.push_back(st.weight);
        debug->final_alphas.push_back(st.alpha);
        debug->history_sizes.push_back(st.history.size());
      }
    }
    const Metrics metrics = evaluate(report);
    report.coverage = metrics.coverage;
    report.avg_width = metrics.avg_width;
  }
};

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::gmocp: return "gmocp";
    case Method::mocp: return "mocp";
    case Method::single: return "single";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "gmocp") return Method::gmocp;
  if (name == "mocp") return Method::mocp;
  if (name == "single") return Method::single;
  throw std::invalid_argument("unknown method: " + name);
}

RunReport gmocp_run(const Stream& stream, const RunConfig& config, RunDebug* debug) {
  validate_config(stream, config);
  Loop loop(stream, config);
  const GraphParams graph_params{stream.header.n_models, config.n_selective, config.n_trials,
                                 config.eta_e};
  const int b = std::bit_width(static_cast<unsigned>(config.n_selective)) - 1;

  RunReport report;
  report.config = config;
  report.per_step.reserve(stream.records.size());
  std::vector<double> true_scores(loop.n_models);

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const StreamRecord& rec = stream.records[i];
    const auto t = static_cast<std::int64_t>(i + 1);
    const double u = uniform01(loop.rng_u);

    loop.rescale_weights_if_needed();
    const GraphRealization graph =
        realize_graph(graph_params, loop.weights, loop.rng_graph, loop.rng_node);
    const std::size_t chosen = sample_model(graph.candidate_set, loop.weights, loop.rng_model);

    StepOutcome out = loop.predict(rec, t, chosen, u);
    out.updates_performed = static_cast<std::uint32_t>(graph.candidate_set.size());

    for (std::size_t m = 0; m < loop.n_models; ++m) {
      true_scores[m] = loop.true_label_score(rec, m, u);
    }
    for (std::uint32_t m : graph.candidate_set) {
      ModelState& st = loop.models[m];
      const double optimal = optimal_miscoverage(st.history, true_scores[m],
                                                 static_cast<std::size_t>(t));
      const double loss = pinball_loss(optimal, st.alpha, config.alpha_target);
      const double est = importance_weighted_loss(loss, graph.inclusion_probs[m], true);
      loop.set_weight(m, multiplicative_update(st.weight, est, config.epsilon, b));
      const double grad = pinball_gradient(optimal, st.alpha, config.alpha_target);
      sfogd_update(st, grad, config.eta);
    }
    loop.append_histories(true_scores);

    report.updates_total += out.updates_performed;
    report.per_step.push_back(out);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  loop.finalize(report, debug);
  return report;
}

RunReport mocp_run(const Stream& stream, const RunConfig& config, RunDebug* debug) {
  validate_config(stream, config);
  Loop loop(stream, config);

  RunReport report;
  report.config = config;
  report.per_step.reserve(stream.records.size());
  std::vector<double> true_scores(loop.n_models);

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const StreamRecord& rec = stream.records[i];
    const auto t = static_cast<std::int64_t>(i + 1);
    const double u = uniform01(loop.rng_u);

    loop.rescale_weights_if_needed();
    const std::size_t chosen = sample_categorical(loop.weights, loop.rng_model);

    StepOutcome out = loop.predict(rec, t, chosen, u);
    out.updates_performed = static_cast<std::uint32_t>(loop.n_models);

    for (std::size_t m = 0; m < loop.n_models; ++m) {
      true_scores[m] = loop.true_label_score(rec, m, u);
    }
    // Full-information updates: every model pays its raw pinball loss.
    for (std::size_t m = 0; m < loop.n_models; ++m) {
      ModelState& st = loop.models[m];
      const double optimal = optimal_miscoverage(st.history, true_scores[m],
                                                 static_cast<std::size_t>(t));
      const double loss = pinball_loss(optimal, st.alpha, config.alpha_target);
      loop.set_weight(m, multiplicative_update(st.weight, loss, config.epsilon, 0));
      const double grad = pinball_gradient(optimal, st.alpha, config.alpha_target);
      sfogd_update(st, grad, config.eta);
    }
    loop.append_histories(true_scores);

    report.updates_total += out.updates_performed;
    report.per_step.push_back(out);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  loop.finalize(report, debug);
  return report;
}

RunReport single_run(const Stream& stream, const RunConfig& config, RunDebug* debug) {
  validate_config(stream, config);
  Loop loop(stream, config);
  const auto fixed = static_cast<std::size_t>(config.model_index);

  RunReport report;
  report.config = config;
  report.per_step.reserve(stream.records.size());
  std::vector<double> true_scores(loop.n_models);

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < stream.records.size(); ++i) {
    const StreamRecord& rec = stream.records[i];
    const auto t = static_cast<std::int64_t>(i + 1);
    const double u = uniform01(loop.rng_u);

    StepOutcome out = loop.predict(rec, t, fixed, u);
    out.updates_performed = 1;

    for (std::size_t m = 0; m < loop.n_models; ++m) {
      true_scores[m] = loop.true_label_score(rec, m, u);
    }
    ModelState& st = loop.models[fixed];
    const double optimal = optimal_miscoverage(st.history, true_scores[fixed],
                                               static_cast<std::size_t>(t));
    const double grad = pinball_gradient(optimal, st.alpha, config.alpha_target);
    sfogd_update(st, grad, config.eta);
    loop.append_histories(true_scores);

    report.updates_total += out.updates_performed;
    report.per_step.push_back(out);
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  loop.finalize(report, debug);
  return report;
}

RunReport run(const Stream& stream, const RunConfig& config, RunDebug* debug) {
  switch (config.method) {
    case Method::gmocp: return gmocp_run(stream, config, debug);
    case Method::mocp: return mocp_run(stream, config, debug);
    case Method::single: return single_run(stream, config, debug);
  }
  throw std::invalid_argument("run: unknown method");
}

Metrics evaluate(const RunReport& report) {
  if (report.per_step.empty()) throw std::invalid_argument("evaluate: empty report");
  Metrics metrics;
  metrics.runtime_seconds = report.runtime_seconds;
  std::int64_t n = 0;
  double covered = 0.0;
  double width = 0.0;
  for (const StepOutcome& step : report.per_step) {
    if (step.t <= report.config.warmup) continue;
    ++n;
    covered += step.covered ? 1.0 : 0.0;
    width += static_cast<double>(step.set_size);
  }
  if (n == 0) throw std::invalid_argument("evaluate: no post-warmup steps");
  metrics.coverage = covered / static_cast<double>(n);
  metrics.avg_width = width / static_cast<double>(n);
  return metrics;
}

}  // namespace gmocp
