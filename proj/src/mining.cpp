#include "mvsoft/mining.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mvsoft/error.hpp"

namespace mvsoft {

void validate(const MiningSpec& spec) {
  if (!std::isfinite(spec.gamma) || spec.gamma < 0.0) {
    throw std::invalid_argument("MiningSpec: gamma must be finite and >= 0");
  }
  if (!(spec.keep_ratio > 0.0 && spec.keep_ratio <= 1.0)) {
    throw std::invalid_argument("MiningSpec: keep_ratio must lie in (0, 1]");
  }
}

double focal_weight(double p_y, double gamma) {
  if (!(p_y >= 0.0 && p_y <= 1.0)) {
    throw InvalidProbability("focal_weight: p_y outside [0, 1]");
  }
  return std::pow(1.0 - p_y, gamma);
}

double focal_weight_backward(double p_y, double gamma) {
  if (gamma == 0.0) return 0.0;
  double q = 1.0 - p_y;
  if (q < 1e-15) return 0.0;
  return -gamma * std::pow(q, gamma - 1.0);
}

std::vector<bool> hard_mining_mask(const std::vector<double>& per_sample_losses,
                                   double keep_ratio) {
  const std::size_t b = per_sample_losses.size();
  std::size_t n_keep = static_cast<std::size_t>(
      std::ceil(keep_ratio * static_cast<double>(b)));
  n_keep = std::min(n_keep, b);

  std::vector<std::size_t> order(b);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) {
                     return per_sample_losses[i] > per_sample_losses[j];
                   });
  std::vector<bool> mask(b, false);
  for (std::size_t i = 0; i < n_keep; ++i) mask[order[i]] = true;
  return mask;
}

}  // namespace mvsoft
