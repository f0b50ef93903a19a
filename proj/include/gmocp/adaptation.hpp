#pragma once

#include <cstdint>

#include "gmocp/score_index.hpp"

namespace gmocp {

struct AdaptationParams {
  double alpha_target = 0.1;  // desired miscoverage, in (0,1)
  double eta = 0.05;          // SF-OGD learning rate, > 0
  double epsilon = 0.2;       // multiplicative-weights step size, in (0,1)
  int weight_scale = 0;       // b = floor(log2 J); loss exponent divided by 2^b
};

// Everything the online loop tracks per model.
struct ModelState {
  double weight = 1.0;       // multiplicative weight, stays > 0
  double alpha = 0.1;        // adaptive miscoverage, clamped to [0,1]
  double grad_sq_sum = 0.0;  // running sum of squared pinball gradients
  ScoreIndex history;        // scores of the true label at past steps
};

// Quantile (pinball) loss of the adaptive miscoverage against the realized
// optimal one: alpha_target * (optimal - alpha) - min(0, optimal - alpha).
double pinball_loss(double optimal_alpha, double alpha, double alpha_target);

// Gradient of the pinball loss in alpha: I[optimal < alpha] - alpha_target.
// The indicator equals the step's miss flag except on exact ties.
double pinball_gradient(double optimal_alpha, double alpha, double alpha_target);

// Scale-free online gradient descent step. Accumulates grad^2 first, so the
// denominator includes the current gradient, then clamps alpha to [0,1].
// A zero gradient on a fresh state leaves alpha untouched.
void sfogd_update(ModelState& state, double grad, double eta);

// Importance-sampling estimate: loss / inclusion_prob when the model was in
// the candidate set, 0 otherwise. A selected model with a nonpositive
// inclusion probability indicates a bug upstream and faults.
double importance_weighted_loss(double loss, double inclusion_prob, bool selected);

// Multiplicative-weights update: weight * exp(-epsilon * est_loss / 2^scale).
double multiplicative_update(double weight, double est_loss, double epsilon, int scale);

}  // namespace gmocp
