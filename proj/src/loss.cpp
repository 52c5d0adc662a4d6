#include "mvsoft/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvsoft/error.hpp"

namespace mvsoft {

namespace {

void check_labels(const std::vector<int>& labels, std::size_t num_classes,
                  std::size_t batch_rows) {
  if (labels.size() != batch_rows) {
    throw DimensionMismatch("loss: label count does not match batch rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw std::out_of_range("loss: label outside [0, num_classes)");
    }
  }
}

// Everything the forward pass produces that the backward pass reuses.
struct Core {
  Mat xhat;                     // B x d unit features
  Mat what;                     // K x d unit weights
  Mat cosines;                  // B x K
  Mat flags;                    // B x K
  Mat u;                        // modified logits
  Mat p;                        // softmax of u
  std::vector<double> ce;       // -log p_y per sample
  std::vector<double> alpha;    // d(loss_i)/d(ce-branch) multiplier
  std::vector<bool> keep;      // hard-mining mask (empty unless hard mining)
  LossOutput out;
};

Core run_forward(const EmbeddingBatch& batch, const ClassifierWeights& weights,
                 const LossConfig& cfg, const PinnedState* pinned) {
  validate(cfg);
  const std::size_t b = batch.features.rows;
  const std::size_t k = weights.weights.rows;
  if (b == 0) throw std::invalid_argument("loss: empty batch");
  if (batch.features.cols != weights.weights.cols) {
    throw DimensionMismatch("loss: feature and weight dimensions differ");
  }
  check_labels(batch.labels, k, b);

  Core core;
  auto [xhat, xnorms] = normalize_rows(batch.features);
  auto [what, wnorms] = normalize_rows(weights.weights);
  core.xhat = std::move(xhat);
  core.what = std::move(what);

  core.cosines = Mat(b, k);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double c = dot(core.xhat.row(i), core.what.row(j), core.xhat.cols);
      core.cosines(i, j) = std::clamp(c, -1.0, 1.0);
    }
  }

  core.flags = pinned ? pinned->flags
                      : indicator(core.cosines, batch.labels, cfg.margin);
  if (core.flags.rows != b || core.flags.cols != k) {
    throw DimensionMismatch("loss: pinned flag matrix has wrong shape");
  }
  core.u = modified_logits(core.cosines, core.flags, batch.labels, cfg);
  for (double& v : core.u.a) v *= cfg.scale_s;

  // Softmax with max subtraction, row by row.
  core.p = Mat(b, k);
  core.ce.resize(b);
  core.out.p_y.resize(b);
  core.out.misclass_counts.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    double m = core.u(i, 0);
    for (std::size_t j = 1; j < k; ++j) m = std::max(m, core.u(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double e = std::exp(core.u(i, j) - m);
      core.p(i, j) = e;
      z += e;
    }
    for (std::size_t j = 0; j < k; ++j) core.p(i, j) /= z;
    const int y = batch.labels[i];
    core.ce[i] = (m + std::log(z)) - core.u(i, static_cast<std::size_t>(y));
    if (core.ce[i] < 0.0) core.ce[i] = 0.0;  // guard against -0 rounding
    core.out.p_y[i] = core.p(i, static_cast<std::size_t>(y));
    int cnt = 0;
    for (std::size_t j = 0; j < k; ++j) cnt += core.flags(i, j) != 0.0;
    core.out.misclass_counts[i] = cnt;
  }

  // Mining weight g_i and the gradient multiplier alpha_i.
  core.alpha.assign(b, 1.0);
  std::vector<double> g(b, 1.0);
  switch (cfg.mining.kind) {
    case MiningKind::none:
      break;
    case MiningKind::focal:
      for (std::size_t i = 0; i < b; ++i) {
        double py = core.out.p_y[i];
        double gi = focal_weight(py, cfg.mining.gamma);
        double gp = focal_weight_backward(py, cfg.mining.gamma);
        g[i] = gi;
        core.alpha[i] = gi - gp * py * core.ce[i];
      }
      break;
    case MiningKind::hard: {
      if (pinned) {
        core.keep = pinned->keep;
        if (core.keep.size() != b) {
          throw DimensionMismatch("loss: pinned keep mask has wrong length");
        }
      } else {
        core.keep = hard_mining_mask(core.ce, cfg.mining.keep_ratio);
      }
      for (std::size_t i = 0; i < b; ++i) {
        g[i] = core.keep[i] ? 1.0 : 0.0;
        core.alpha[i] = g[i];
      }
      break;
    }
  }

  core.out.per_sample_loss.resize(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    core.out.per_sample_loss[i] = g[i] * core.ce[i];
    total += core.out.per_sample_loss[i];
  }
  core.out.mean_loss = b > 0 ? total / static_cast<double>(b) : 0.0;
  if (!std::isfinite(core.out.mean_loss)) {
    throw NonFiniteLoss("loss: mean loss is not finite");
  }
  return core;
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (!std::isfinite(cfg.scale_s) || cfg.scale_s <= 0.0) {
    throw std::invalid_argument("LossConfig: scale_s must be finite and > 0");
  }
  if (!std::isfinite(cfg.t) || cfg.t < 0.0) {
    throw std::invalid_argument("LossConfig: t must be finite and >= 0");
  }
  validate(cfg.margin);
  validate(cfg.mining);
}

Mat indicator(const Mat& cosines, const std::vector<int>& labels,
              const MarginSpec& margin) {
  validate(margin);
  check_labels(labels, cosines.cols, cosines.rows);
  Mat flags(cosines.rows, cosines.cols);
  for (std::size_t i = 0; i < cosines.rows; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const double fy = margin_forward(cosines(i, y), margin);
    for (std::size_t j = 0; j < cosines.cols; ++j) {
      if (j == y) continue;
      flags(i, j) = (fy - cosines(i, j) < 0.0) ? 1.0 : 0.0;
    }
  }
  return flags;
}

Mat reweight_h(const Mat& cosines, const Mat& flags,
               const std::vector<int>& labels, double scale_s, double t,
               MvMode mode) {
  check_labels(labels, cosines.cols, cosines.rows);
  if (flags.rows != cosines.rows || flags.cols != cosines.cols) {
    throw DimensionMismatch("reweight_h: flag shape differs from cosines");
  }
  Mat h(cosines.rows, cosines.cols, 1.0);
  if (mode == MvMode::off) return h;
  for (std::size_t i = 0; i < cosines.rows; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = 0; j < cosines.cols; ++j) {
      if (j == y || flags(i, j) == 0.0) continue;
      if (mode == MvMode::fixed) {
        h(i, j) = std::exp(scale_s * t);
      } else {
        h(i, j) = std::exp(scale_s * t * (cosines(i, j) + 1.0));
      }
    }
  }
  return h;
}

Mat modified_logits(const Mat& cosines, const Mat& flags,
                    const std::vector<int>& labels, const LossConfig& cfg) {
  check_labels(labels, cosines.cols, cosines.rows);
  if (flags.rows != cosines.rows || flags.cols != cosines.cols) {
    throw DimensionMismatch("modified_logits: flag shape differs from cosines");
  }
  Mat u(cosines.rows, cosines.cols);
  for (std::size_t i = 0; i < cosines.rows; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    for (std::size_t j = 0; j < cosines.cols; ++j) {
      const double c = cosines(i, j);
      if (j == y) {
        u(i, j) = margin_forward(c, cfg.margin);
      } else if (cfg.mv_mode != MvMode::off && flags(i, j) != 0.0) {
        u(i, j) = cfg.mv_mode == MvMode::fixed ? c + cfg.t
                                               : (1.0 + cfg.t) * c + cfg.t;
      } else {
        u(i, j) = c;
      }
    }
  }
  return u;
}

PinnedState pin_state(const EmbeddingBatch& batch,
                      const ClassifierWeights& weights,
                      const LossConfig& cfg) {
  Core core = run_forward(batch, weights, cfg, nullptr);
  PinnedState st;
  st.flags = std::move(core.flags);
  st.keep = std::move(core.keep);
  return st;
}

LossOutput loss_forward(const EmbeddingBatch& batch,
                        const ClassifierWeights& weights,
                        const LossConfig& cfg) {
  return run_forward(batch, weights, cfg, nullptr).out;
}

LossOutput loss_forward_pinned(const EmbeddingBatch& batch,
                               const ClassifierWeights& weights,
                               const LossConfig& cfg,
                               const PinnedState& pinned) {
  return run_forward(batch, weights, cfg, &pinned).out;
}

LossOutput loss_backward(const EmbeddingBatch& batch,
                         const ClassifierWeights& weights,
                         const LossConfig& cfg) {
  Core core = run_forward(batch, weights, cfg, nullptr);
  const std::size_t b = batch.features.rows;
  const std::size_t k = weights.weights.rows;
  const std::size_t d = batch.features.cols;
  const double s = cfg.scale_s;
  const double inv_b = 1.0 / static_cast<double>(b);

  // d(mean_loss)/d(cosine), folding in softmax, mining and the per-slot
  // logit slope. Indicator flags and the keep mask stay fixed.
  Mat gcos(b, k);
  for (std::size_t i = 0; i < b; ++i) {
    const auto y = static_cast<std::size_t>(batch.labels[i]);
    const double a = core.alpha[i] * inv_b;
    if (a == 0.0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      double gu = a * (core.p(i, j) - (j == y ? 1.0 : 0.0));
      double slope;
      if (j == y) {
        slope = s * margin_backward(core.cosines(i, j), cfg.margin);
      } else if (cfg.mv_mode == MvMode::adaptive && core.flags(i, j) != 0.0) {
        slope = s * (1.0 + cfg.t);
      } else {
        slope = s;  // fixed-mode shift is constant in the cosine
      }
      gcos(i, j) = gu * slope;
    }
  }

  // Chain through cos = <xhat, what>, then through the normalisations.
  core.out.grad_features = Mat(b, d);
  core.out.grad_weights = Mat(k, d);
  std::vector<double> raw(d), gunit(d);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < k; ++j) acc += gcos(i, j) * core.what(j, c);
      gunit[c] = acc;
    }
    for (std::size_t c = 0; c < d; ++c) raw[c] = batch.features(i, c);
    std::vector<double> gx = normalize_backward(raw, gunit);
    for (std::size_t c = 0; c < d; ++c) core.out.grad_features(i, c) = gx[c];
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < b; ++i) acc += gcos(i, j) * core.xhat(i, c);
      gunit[c] = acc;
    }
    for (std::size_t c = 0; c < d; ++c) raw[c] = weights.weights(j, c);
    std::vector<double> gw = normalize_backward(raw, gunit);
    for (std::size_t c = 0; c < d; ++c) core.out.grad_weights(j, c) = gw[c];
  }
  return core.out;
}

}  // namespace mvsoft
