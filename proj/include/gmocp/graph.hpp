#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace gmocp {

struct GraphParams {
  int n_models = 1;     // M
  int n_selective = 1;  // J
  int n_trials = 1;     // N, categorical draws per selective node
  double eta_e = 0.0;   // exploration rate, in [0,1]
};

// One sampled bipartite graph plus everything derived from it for a step.
struct GraphRealization {
  std::vector<std::uint8_t> adjacency;        // n_selective x n_models, row-major
  std::vector<double> connection_pmf;         // per-model edge probability
  std::vector<double> node_weights;           // summed model weights per selective node
  std::vector<double> node_pmf;               // node_weights normalized
  std::size_t chosen_node = 0;
  std::vector<std::uint32_t> candidate_set;   // models adjacent to the chosen node
  std::vector<double> inclusion_probs;        // per-model candidate-set probability

  bool edge(std::size_t node, std::size_t model, std::size_t n_models) const {
    return adjacency[node * n_models + model] != 0;
  }
};

// Per-model connection probability: (1 - eta_e) * w_m / sum(w) + eta_e / M.
// All weights must be strictly positive.
std::vector<double> connection_pmf(std::span<const double> weights, double eta_e);

// Draws the bipartite adjacency: each selective node performs n_trials
// independent categorical draws from pmf; duplicate draws collapse into a
// single edge, so every row carries between 1 and n_trials edges.
std::vector<std::uint8_t> sample_adjacency(const GraphParams& params,
                                           std::span<const double> pmf,
                                           std::mt19937_64& rng);

// Weight of each selective node: sum of the connected models' weights.
// Faults on a row with no edges.
std::vector<double> selective_node_weights(std::span<const std::uint8_t> adjacency,
                                           std::size_t n_models,
                                           std::span<const double> model_weights);

// Samples a selective node from node_pmf and returns it with its connected
// models (the candidate set).
std::pair<std::size_t, std::vector<std::uint32_t>> sample_node_and_candidates(
    std::span<const std::uint8_t> adjacency, std::size_t n_models,
    std::span<const double> node_pmf, std::mt19937_64& rng);

// Samples one model from the candidate set with weight-proportional
// probability. Faults on an empty candidate set.
std::size_t sample_model(std::span<const std::uint32_t> candidates,
                         std::span<const double> model_weights, std::mt19937_64& rng);

// Candidate-set inclusion probability per model:
// q_m = sum_j node_pmf[j] * (1 - (1 - p_m)^N).
std::vector<double> inclusion_probabilities(std::span<const double> node_pmf,
                                            std::span<const double> conn_pmf,
                                            int n_trials);

// Runs the whole per-step graph pipeline: connection PMF, adjacency, node
// weights and PMF, node choice, candidate set, inclusion probabilities.
GraphRealization realize_graph(const GraphParams& params,
                               std::span<const double> model_weights,
                               std::mt19937_64& graph_rng, std::mt19937_64& node_rng);

}  // namespace gmocp
