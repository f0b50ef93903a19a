#include "gmocp/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gmocp {

double pinball_loss(double optimal_alpha, double alpha, double alpha_target) {
  const double residual = optimal_alpha - alpha;
  return alpha_target * residual - std::min(0.0, residual);
}

double pinball_gradient(double optimal_alpha, double alpha, double alpha_target) {
  return (optimal_alpha < alpha ? 1.0 : 0.0) - alpha_target;
}

void sfogd_update(ModelState& state, double grad, double eta) {
  state.grad_sq_sum += grad * grad;
  if (state.grad_sq_sum > 0.0) {
    state.alpha -= eta * grad / std::sqrt(state.grad_sq_sum);
  }
  state.alpha = std::clamp(state.alpha, 0.0, 1.0);
}

double importance_weighted_loss(double loss, double inclusion_prob, bool selected) {
  if (!selected) return 0.0;
  if (!(inclusion_prob > 0.0)) {
    throw std::logic_error("importance_weighted_loss: selected model with nonpositive inclusion probability");
  }
  return loss / inclusion_prob;
}

double multiplicative_update(double weight, double est_loss, double epsilon, int scale) {
  if (scale < 0) throw std::invalid_argument("multiplicative_update: negative scale");
  const double updated = weight * std::exp(-epsilon * est_loss / std::exp2(static_cast<double>(scale)));
  // exp(-x) never reaches zero mathematically; the floor keeps that true
  // under floating-point underflow as well.
  return std::max(updated, 1e-300);
}

}  // namespace gmocp
