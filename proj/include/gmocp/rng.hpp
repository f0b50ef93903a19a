#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace gmocp {

// splitmix64 finalizer; decorrelates derived seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Named sub-streams derived from one master seed. Each randomness consumer
// owns a stream, so adding or removing draws in one component never shifts
// the sequence seen by another. This is what makes the degenerate
// reductions (e.g. the single-model special case) bit-exact.
enum class RngStream : std::uint64_t {
  graph_trials = 1,
  node_choice = 2,
  model_choice = 3,
  score_noise = 4,
  data_gen = 5,
};

inline std::mt19937_64 make_rng(std::uint64_t master_seed, RngStream stream) {
  const std::uint64_t tag = static_cast<std::uint64_t>(stream);
  return std::mt19937_64(mix64(master_seed ^ mix64(tag)));
}

// Uniform double in [0, 1) using the top 53 bits of the engine output.
// Avoids std::uniform_real_distribution, whose draw sequence is
// implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index drawn with probability weights[i] / sum(weights). Weights need not
// be normalized; they must be nonnegative with a positive sum. Consumes
// exactly one engine draw per call.
inline std::size_t sample_categorical(std::span<const double> weights, std::mt19937_64& rng) {
  if (weights.empty()) throw std::invalid_argument("sample_categorical: empty weight vector");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("sample_categorical: negative or NaN weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_categorical: weights sum to zero");
  const double target = uniform01(rng) * total;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cum += weights[i];
    if (target < cum) return i;
  }
  return weights.size() - 1;
}

}  // namespace gmocp
