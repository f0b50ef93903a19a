#include "gmocp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gmocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_score_inputs(std::span<const double> probs, const ScoreParams& params, double u) {
  validate_probability_vector(probs);
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("nonconformity_score: u outside [0,1]");
  if (!(params.xi >= 0.0)) throw std::invalid_argument("nonconformity_score: xi must be >= 0");
  if (params.k_reg < 0) throw std::invalid_argument("nonconformity_score: k_reg must be >= 0");
}

double rank_penalty(const ScoreParams& params, std::size_t rank) {
  const double excess = static_cast<double>(rank) - static_cast<double>(params.k_reg);
  return excess > 0.0 ? params.xi * std::sqrt(excess) : 0.0;
}

}  // namespace

void validate_probability_vector(std::span<const double> probs, double tolerance) {
  if (probs.size() < 2) throw std::invalid_argument("probability vector needs at least 2 labels");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("probability vector entry outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    throw std::invalid_argument("probability vector does not sum to 1 within tolerance");
  }
}

double nonconformity_score(std::span<const double> probs, std::size_t label,
                           const ScoreParams& params, double u) {
  validate_score_inputs(probs, params, u);
  if (label >= probs.size()) throw std::invalid_argument("nonconformity_score: label out of range");
  const double f = probs[label];
  std::size_t rank = 0;  // labels with probability >= f, including the label itself
  double mass_above = 0.0;
  for (double p : probs) {
    if (p >= f) ++rank;
    if (p > f) mass_above += p;
  }
  return rank_penalty(params, rank) + u * f + mass_above;
}

std::vector<double> nonconformity_scores(std::span<const double> probs,
                                         const ScoreParams& params, double u) {
  validate_score_inputs(probs, params, u);
  const std::size_t k = probs.size();
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return probs[a] > probs[b]; });

  std::vector<double> scores(k);
  double mass_above = 0.0;  // total probability of groups strictly above the tie group
  std::size_t pos = 0;
  while (pos < k) {
    std::size_t end = pos;
    double group_mass = 0.0;
    while (end < k && probs[order[end]] == probs[order[pos]]) {
      group_mass += probs[order[end]];
      ++end;
    }
    const double penalty = rank_penalty(params, end);  // rank of every tie member is `end`
    for (std::size_t i = pos; i < end; ++i) {
      const std::uint32_t lbl = order[i];
      scores[lbl] = penalty + u * probs[lbl] + mass_above;
    }
    mass_above += group_mass;
    pos = end;
  }
  return scores;
}

double quantile_threshold(const ScoreIndex& history, double alpha, std::size_t t) {
  if (t < 1) throw std::invalid_argument("quantile_threshold: t must be >= 1");
  if (history.size() != t - 1) {
    throw std::invalid_argument("quantile_threshold: history length must equal t - 1");
  }
  if (history.empty()) return kInf;
  // Index of the empirical quantile; level ceil(t(1-alpha))/(t-1) exceeds 1
  // exactly when the index exceeds the history length.
  const double index = std::ceil(static_cast<double>(t) * (1.0 - alpha));
  if (index > static_cast<double>(t - 1)) return kInf;
  if (index <= 0.0) return -kInf;
  return history.kth_smallest(static_cast<std::size_t>(index));
}

bool PredictionSet::contains(std::uint32_t label) const {
  return std::binary_search(members.begin(), members.end(), label);
}

PredictionSet prediction_set(std::span<const double> probs, const ScoreParams& params,
                             double u, double qhat) {
  const std::vector<double> scores = nonconformity_scores(probs, params, u);
  PredictionSet set;
  set.members.reserve(scores.size());
  for (std::uint32_t lbl = 0; lbl < scores.size(); ++lbl) {
    if (scores[lbl] <= qhat) set.members.push_back(lbl);
  }
  return set;
}

double optimal_miscoverage(const ScoreIndex& history, double s_true, std::size_t t) {
  if (t < 1) throw std::invalid_argument("optimal_miscoverage: t must be >= 1");
  if (history.size() != t - 1) {
    throw std::invalid_argument("optimal_miscoverage: history length must equal t - 1");
  }
  if (history.empty()) return 1.0;
  const std::size_t below = history.count_less(s_true);
  return 1.0 - static_cast<double>(below) / static_cast<double>(t);
}

}  // namespace gmocp
