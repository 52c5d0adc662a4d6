#ifndef MVSOFT_TESTS_GRADCHECK_COMMON_HPP_
#define MVSOFT_TESTS_GRADCHECK_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fd_check.hpp"
#include "mvsoft/loss.hpp"
#include "mvsoft/rng.hpp"

namespace mvsoft::testing {

// One loss family per slot; the sampler cycles through them so a sweep of n
// configs covers every family at least floor(n/10) times.
inline LossConfig family_config(int family, Rng& rng) {
  LossConfig cfg;
  cfg.scale_s = 4.0 + 28.0 * rng.uniform();  // [4, 32]
  const MarginSpec am{1, 0.35, 0.0};
  const MarginSpec arc{1, 0.0, 0.5};
  const MarginSpec asoft{static_cast<int>(2 + rng.below(2)), 0.0, 0.0};
  switch (family % 10) {
    case 0:  // plain softmax
      break;
    case 1:  // focal
      cfg.mining = {MiningKind::focal, 0.5 + 2.5 * rng.uniform(), 1.0};
      break;
    case 2:  // hard mining
      cfg.mining = {MiningKind::hard, 0.0, 0.5 + 0.4 * rng.uniform()};
      break;
    case 3:  // multiplicative angular margin
      cfg.margin = asoft;
      break;
    case 4:  // additive cosine margin
      cfg.margin = am;
      break;
    case 5:  // additive angular margin
      cfg.margin = arc;
      break;
    case 6:  // naive fusion: focal * arc margin
      cfg.margin = arc;
      cfg.mining = {MiningKind::focal, 2.0, 1.0};
      break;
    case 7:  // naive fusion: hard mining * cosine margin
      cfg.margin = am;
      cfg.mining = {MiningKind::hard, 0.0, 0.75};
      break;
    case 8:  // fixed re-weighting
      cfg.margin = rng.below(2) ? am : arc;
      cfg.mv_mode = MvMode::fixed;
      cfg.t = 0.05 + 0.45 * rng.uniform();
      break;
    case 9:  // adaptive re-weighting
      cfg.margin = rng.below(2) ? am : arc;
      cfg.mv_mode = MvMode::adaptive;
      cfg.t = 0.05 + 0.45 * rng.uniform();
      break;
  }
  return cfg;
}

struct GradCase {
  EmbeddingBatch batch;
  ClassifierWeights weights;
  LossConfig cfg;
};

// Random instance whose cosines stay away from +-1 so the finite-difference
// window never crosses the cosine clamp or the angular-margin endpoints.
inline GradCase sample_case(int family, std::uint64_t seed) {
  Rng rng(seed);
  for (;;) {
    GradCase gc;
    gc.cfg = family_config(family, rng);
    const std::size_t b = 2 + rng.below(5);   // 2..6
    const std::size_t k = 3 + rng.below(6);   // 3..8
    const std::size_t d = 6 + rng.below(7);   // 6..12
    gc.batch.features = Mat(b, d);
    for (double& v : gc.batch.features.a) v = rng.gaussian();
    gc.weights.weights = Mat(k, d);
    for (double& v : gc.weights.weights.a) v = rng.gaussian();
    gc.batch.labels.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
      gc.batch.labels[i] = static_cast<int>(rng.below(k));
    }
    CosineLogits cl = cosine_logits(gc.batch, gc.weights);
    bool ok = true;
    for (double c : cl.cosines.a) ok = ok && std::abs(c) < 0.99;
    if (ok) return gc;
  }
}

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst;  // which coordinate was worst, for diagnostics
};

// Compare loss_backward's analytic gradients against central finite
// differences of the pinned forward pass over every raw feature and weight
// coordinate.
inline GradCheckResult gradcheck_case(GradCase gc, double step = 1e-6) {
  const PinnedState pinned = pin_state(gc.batch, gc.weights, gc.cfg);
  const LossOutput out = loss_backward(gc.batch, gc.weights, gc.cfg);
  auto f = [&]() {
    return loss_forward_pinned(gc.batch, gc.weights, gc.cfg, pinned).mean_loss;
  };
  GradCheckResult res;
  auto consider = [&](double analytic, double* slot, const char* tag,
                      std::size_t idx) {
    const double numeric = central_diff(f, slot, step);
    const double e = rel_err(analytic, numeric);
    if (e > res.max_rel_err) {
      res.max_rel_err = e;
      res.worst = std::string(tag) + "[" + std::to_string(idx) + "]";
    }
  };
  for (std::size_t i = 0; i < gc.batch.features.a.size(); ++i) {
    consider(out.grad_features.a[i], &gc.batch.features.a[i], "features", i);
  }
  for (std::size_t i = 0; i < gc.weights.weights.a.size(); ++i) {
    consider(out.grad_weights.a[i], &gc.weights.weights.a[i], "weights", i);
  }
  return res;
}

}  // namespace mvsoft::testing

#endif  // MVSOFT_TESTS_GRADCHECK_COMMON_HPP_
