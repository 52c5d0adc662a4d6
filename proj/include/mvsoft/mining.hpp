#ifndef MVSOFT_MINING_HPP_
#define MVSOFT_MINING_HPP_

#include <vector>

namespace mvsoft {

enum class MiningKind { none, focal, hard };

struct MiningSpec {
  MiningKind kind = MiningKind::none;
  double gamma = 0.0;       // focal modulating factor, >= 0
  double keep_ratio = 1.0;  // fraction of high-loss samples kept, in (0, 1]
};

void validate(const MiningSpec& spec);

// (1 - p_y)^gamma. Throws InvalidProbability outside [0, 1].
double focal_weight(double p_y, double gamma);

// d/dp of (1 - p)^gamma = -gamma (1 - p)^{gamma - 1}; returns 0 once
// 1 - p < 1e-15 so the gamma < 1 blowup never reaches callers.
double focal_weight_backward(double p_y, double gamma);

// Keeps exactly ceil(keep_ratio * B) highest-loss samples; ties broken
// toward the lower index. Recomputed from fresh losses every mini-batch.
std::vector<bool> hard_mining_mask(const std::vector<double>& per_sample_losses,
                                   double keep_ratio);

}  // namespace mvsoft

#endif  // MVSOFT_MINING_HPP_
