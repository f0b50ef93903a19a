#include "gmocp/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "gmocp/rng.hpp"

namespace gmocp {

namespace {

void validate_params(const GraphParams& params) {
  if (params.n_models < 1) throw std::invalid_argument("graph: n_models must be >= 1");
  if (params.n_selective < 1) throw std::invalid_argument("graph: n_selective must be >= 1");
  if (params.n_trials < 1) throw std::invalid_argument("graph: n_trials must be >= 1");
  if (!(params.eta_e >= 0.0 && params.eta_e <= 1.0)) {
    throw std::invalid_argument("graph: eta_e outside [0,1]");
  }
}

}  // namespace

std::vector<double> connection_pmf(std::span<const double> weights, double eta_e) {
  if (weights.empty()) throw std::invalid_argument("connection_pmf: no models");
  if (!(eta_e >= 0.0 && eta_e <= 1.0)) throw std::invalid_argument("connection_pmf: eta_e outside [0,1]");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("connection_pmf: weights must be strictly positive");
    total += w;
  }
  const double m = static_cast<double>(weights.size());
  std::vector<double> pmf(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    pmf[i] = (1.0 - eta_e) * weights[i] / total + eta_e / m;
  }
  return pmf;
}

std::vector<std::uint8_t> sample_adjacency(const GraphParams& params,
                                           std::span<const double> pmf,
                                           std::mt19937_64& rng) {
  validate_params(params);
  if (pmf.size() != static_cast<std::size_t>(params.n_models)) {
    throw std::invalid_argument("sample_adjacency: pmf size mismatch");
  }
  const std::size_t m = pmf.size();
  std::vector<std::uint8_t> adjacency(static_cast<std::size_t>(params.n_selective) * m, 0);
  for (int j = 0; j < params.n_selective; ++j) {
    for (int n = 0; n < params.n_trials; ++n) {
      const std::size_t drawn = sample_categorical(pmf, rng);
      adjacency[static_cast<std::size_t>(j) * m + drawn] = 1;
    }
  }
  return adjacency;
}

std::vector<double> selective_node_weights(std::span<const std::uint8_t> adjacency,
                                           std::size_t n_models,
                                           std::span<const double> model_weights) {
  if (n_models == 0 || adjacency.size() % n_models != 0) {
    throw std::invalid_argument("selective_node_weights: adjacency shape mismatch");
  }
  if (model_weights.size() != n_models) {
    throw std::invalid_argument("selective_node_weights: weight count mismatch");
  }
  const std::size_t n_nodes = adjacency.size() / n_models;
  std::vector<double> node_weights(n_nodes, 0.0);
  for (std::size_t j = 0; j < n_nodes; ++j) {
    bool any = false;
    for (std::size_t m = 0; m < n_models; ++m) {
      if (adjacency[j * n_models + m]) {
        node_weights[j] += model_weights[m];
        any = true;
      }
    }
    if (!any) throw std::logic_error("selective_node_weights: node with no edges");
  }
  return node_weights;
}

std::pair<std::size_t, std::vector<std::uint32_t>> sample_node_and_candidates(
    std::span<const std::uint8_t> adjacency, std::size_t n_models,
    std::span<const double> node_pmf, std::mt19937_64& rng) {
  if (n_models == 0 || adjacency.size() != node_pmf.size() * n_models) {
    throw std::invalid_argument("sample_node_and_candidates: shape mismatch");
  }
  const std::size_t node = sample_categorical(node_pmf, rng);
  std::vector<std::uint32_t> candidates;
  for (std::size_t m = 0; m < n_models; ++m) {
    if (adjacency[node * n_models + m]) candidates.push_back(static_cast<std::uint32_t>(m));
  }
  return {node, std::move(candidates)};
}

std::size_t sample_model(std::span<const std::uint32_t> candidates,
                         std::span<const double> model_weights, std::mt19937_64& rng) {
  if (candidates.empty()) throw std::logic_error("sample_model: empty candidate set");
  std::vector<double> weights;
  weights.reserve(candidates.size());
  for (std::uint32_t m : candidates) {
    if (m >= model_weights.size()) throw std::invalid_argument("sample_model: candidate out of range");
    weights.push_back(model_weights[m]);
  }
  return candidates[sample_categorical(weights, rng)];
}

std::vector<double> inclusion_probabilities(std::span<const double> node_pmf,
                                            std::span<const double> conn_pmf,
                                            int n_trials) {
  if (n_trials < 1) throw std::invalid_argument("inclusion_probabilities: n_trials must be >= 1");
  std::vector<double> probs(conn_pmf.size());
  for (std::size_t m = 0; m < conn_pmf.size(); ++m) {
    const double connect = 1.0 - std::pow(1.0 - conn_pmf[m], static_cast<double>(n_trials));
    double q = 0.0;
    for (double pj : node_pmf) q += pj * connect;
    probs[m] = q;
  }
  return probs;
}

GraphRealization realize_graph(const GraphParams& params,
                               std::span<const double> model_weights,
                               std::mt19937_64& graph_rng, std::mt19937_64& node_rng) {
  validate_params(params);
  if (model_weights.size() != static_cast<std::size_t>(params.n_models)) {
    throw std::invalid_argument("realize_graph: weight count mismatch");
  }
  GraphRealization real;
  real.connection_pmf = connection_pmf(model_weights, params.eta_e);
  real.adjacency = sample_adjacency(params, real.connection_pmf, graph_rng);
  real.node_weights = selective_node_weights(real.adjacency, model_weights.size(), model_weights);
  double total = 0.0;
  for (double u : real.node_weights) total += u;
  real.node_pmf.resize(real.node_weights.size());
  for (std::size_t j = 0; j < real.node_weights.size(); ++j) {
    real.node_pmf[j] = real.node_weights[j] / total;
  }
  auto [node, candidates] =
      sample_node_and_candidates(real.adjacency, model_weights.size(), real.node_pmf, node_rng);
  real.chosen_node = node;
  real.candidate_set = std::move(candidates);
  real.inclusion_probs = inclusion_probabilities(real.node_pmf, real.connection_pmf, params.n_trials);
  return real;
}

}  // namespace gmocp
