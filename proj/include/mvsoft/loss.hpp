#ifndef MVSOFT_LOSS_HPP_
#define MVSOFT_LOSS_HPP_

#include <vector>

#include "mvsoft/geometry.hpp"
#include "mvsoft/margins.hpp"
#include "mvsoft/matrix.hpp"
#include "mvsoft/mining.hpp"

namespace mvsoft {

// How mis-classified (support-vector-like) negative classes are re-weighted.
//   off      -- no re-weighting, plain denominator
//   fixed    -- flagged negatives get a constant logit shift of t
//   adaptive -- flagged negatives get a shift that grows with their cosine
enum class MvMode { off, fixed, adaptive };

struct LossConfig {
  double scale_s = 32.0;
  MarginSpec margin;   // (1, 0, 0) leaves the target logit untouched
  MiningSpec mining;   // none by default
  MvMode mv_mode = MvMode::off;
  double t = 0.0;      // re-weighting strength, used when mv_mode != off
};

void validate(const LossConfig& cfg);

struct LossOutput {
  std::vector<double> per_sample_loss;  // length B
  double mean_loss = 0.0;               // arithmetic mean of per_sample_loss
  Mat grad_features;                    // B x d, d(mean_loss)/d(features); empty on forward-only
  Mat grad_weights;                     // K x d, d(mean_loss)/d(weights); empty on forward-only
  std::vector<int> misclass_counts;     // per sample: #negatives violating the margin
  std::vector<double> p_y;              // per sample: target probability under modified logits
};

// Binary flags (B x K). flags(i,k) = 1 when class k != y_i lies inside the
// margin, i.e. f(m, theta_{y_i}) - cos(theta_k) < 0. Target column and exact
// boundary hits are 0.
Mat indicator(const Mat& cosines, const std::vector<int>& labels,
              const MarginSpec& margin);

// Multiplier h applied to each negative's exponential term in the
// denominator. 1.0 everywhere for off / unflagged entries; exp(s*t) for fixed
// mode; exp(s*t*(cos+1)) for adaptive mode on flagged entries.
// loss_forward never materialises these values -- it folds them into the
// logits as log(h) -- but they define the reference semantics.
Mat reweight_h(const Mat& cosines, const Mat& flags,
               const std::vector<int>& labels, double scale_s, double t,
               MvMode mode);

// Margin- and reweight-adjusted logits (B x K), before the scale factor:
//   target slot:   f(m, theta_y)
//   flagged slot:  cos + t              (fixed)
//                  (1 + t) * cos + t    (adaptive)
//   otherwise:     cos
// The loss feeds s * result into a softmax.
Mat modified_logits(const Mat& cosines, const Mat& flags,
                    const std::vector<int>& labels, const LossConfig& cfg);

// State frozen at the current operating point so that the loss becomes a
// smooth function of the inputs: indicator flags and (when hard mining is
// active) the keep mask. loss_backward differentiates exactly this smooth
// function; loss_forward_pinned re-evaluates it at perturbed inputs, which is
// what finite-difference checks need.
struct PinnedState {
  Mat flags;               // B x K indicator flags
  std::vector<bool> keep;  // hard-mining keep mask; empty when unused
};

PinnedState pin_state(const EmbeddingBatch& batch,
                      const ClassifierWeights& weights, const LossConfig& cfg);

// Full forward pass: losses, target probabilities, flag counts. Gradient
// matrices are left empty.
LossOutput loss_forward(const EmbeddingBatch& batch,
                        const ClassifierWeights& weights,
                        const LossConfig& cfg);

// Forward pass with flags/mask taken from `pinned` instead of being
// recomputed from the current cosines.
LossOutput loss_forward_pinned(const EmbeddingBatch& batch,
                               const ClassifierWeights& weights,
                               const LossConfig& cfg,
                               const PinnedState& pinned);

// Forward plus analytic gradients of mean_loss with respect to the raw
// (unnormalised) features and weights. Indicator flags and the hard-mining
// mask are treated as constants of the operating point.
LossOutput loss_backward(const EmbeddingBatch& batch,
                         const ClassifierWeights& weights,
                         const LossConfig& cfg);

}  // namespace mvsoft

#endif  // MVSOFT_LOSS_HPP_
