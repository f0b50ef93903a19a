#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gmocp/score_index.hpp"

namespace gmocp {

// Regularization of the rank term in the nonconformity score.
struct ScoreParams {
  double xi = 0.01;  // rank penalty strength, >= 0
  int k_reg = 2;     // rank offset, >= 0
};

inline constexpr double kProbSumTolerance = 1e-6;

// Rejects vectors that are not a probability distribution over >= 2 labels
// (entries in [0,1], sum within tolerance of 1).
void validate_probability_vector(std::span<const double> probs,
                                 double tolerance = kProbSumTolerance);

// Score of one label under one model's probability vector:
//
//   xi * sqrt(max(rank - k_reg, 0)) + u * probs[label] + mass_above
//
// where rank counts labels with probability >= probs[label] (ties included)
// and mass_above sums the probabilities strictly above it (ties excluded).
// u is the step's shared uniform draw in [0,1].
double nonconformity_score(std::span<const double> probs, std::size_t label,
                           const ScoreParams& params, double u);

// Scores for all labels at once. Equivalent to calling nonconformity_score
// per label but validates once and runs in O(K log K).
std::vector<double> nonconformity_scores(std::span<const double> probs,
                                         const ScoreParams& params, double u);

// Empirical-quantile threshold over the scores of steps 1..t-1, taken at
// level ceil(t * (1 - alpha)) / (t - 1). Out-of-range levels saturate:
// above 1 (or an empty history) yields +inf so every label is kept, at or
// below 0 yields -inf so the set is empty.
double quantile_threshold(const ScoreIndex& history, double alpha, std::size_t t);

struct PredictionSet {
  std::vector<std::uint32_t> members;  // ascending label indices

  std::size_t size() const { return members.size(); }
  bool contains(std::uint32_t label) const;
};

// Labels whose score is <= qhat (ties with the threshold are kept).
PredictionSet prediction_set(std::span<const double> probs, const ScoreParams& params,
                             double u, double qhat);

// Largest miscoverage level at which the threshold would still have covered
// a true-label score of s_true: 1 - r/t with r the number of historical
// scores strictly below s_true, or 1 on an empty history.
double optimal_miscoverage(const ScoreIndex& history, double s_true, std::size_t t);

}  // namespace gmocp
