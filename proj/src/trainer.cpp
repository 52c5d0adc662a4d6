#include "mvsoft/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mvsoft/error.hpp"

namespace mvsoft {

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("TrainConfig: epochs < 1");
  if (cfg.batch_size < 1) {
    throw std::invalid_argument("TrainConfig: batch_size < 1");
  }
  // lr = 0 is allowed as an explicit no-update run.
  if (!std::isfinite(cfg.lr) || cfg.lr < 0.0) {
    throw std::invalid_argument("TrainConfig: lr must be finite and >= 0");
  }
  if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor < 1.0)) {
    throw std::invalid_argument("TrainConfig: lr_decay_factor outside (0,1)");
  }
  for (std::size_t i = 0; i < cfg.lr_decay_epochs.size(); ++i) {
    if (cfg.lr_decay_epochs[i] < 1 || cfg.lr_decay_epochs[i] >= cfg.epochs) {
      throw std::invalid_argument(
          "TrainConfig: decay epochs must lie in [1, epochs)");
    }
    if (i > 0 && cfg.lr_decay_epochs[i] <= cfg.lr_decay_epochs[i - 1]) {
      throw std::invalid_argument(
          "TrainConfig: decay epochs must be strictly increasing");
    }
  }
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) {
    throw std::invalid_argument("TrainConfig: momentum outside [0,1)");
  }
  if (!std::isfinite(cfg.weight_decay) || cfg.weight_decay < 0.0) {
    throw std::invalid_argument("TrainConfig: weight_decay < 0");
  }
  if (cfg.hidden_dim < 1 || cfg.embed_dim < 1) {
    throw std::invalid_argument("TrainConfig: backbone dims must be >= 1");
  }
  validate(cfg.loss);
}

void validate(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) {
    throw std::invalid_argument("SyntheticSpec: num_classes < 2");
  }
  if (spec.samples_per_class < 1) {
    throw std::invalid_argument("SyntheticSpec: samples_per_class < 1");
  }
  if (!std::isfinite(spec.concentration) || spec.concentration <= 0.0) {
    throw std::invalid_argument("SyntheticSpec: concentration must be > 0");
  }
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("SyntheticSpec: train_fraction outside (0,1)");
  }
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  if (spec.input_dim < 2) {
    throw InfeasibleSpec("generate_synthetic: input_dim < 2");
  }
  const auto k = static_cast<std::size_t>(spec.num_classes);
  const auto d = static_cast<std::size_t>(spec.input_dim);
  const auto spc = static_cast<std::size_t>(spec.samples_per_class);
  Rng rng(spec.seed);

  Mat dirs(k, d);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < k; ++i) {
    for (;;) {
      for (std::size_t c = 0; c < d; ++c) v[c] = rng.gaussian();
      if (d >= k) {
        // Gram-Schmidt against the rows already placed.
        for (std::size_t j = 0; j < i; ++j) {
          double proj = dot(v.data(), dirs.row(j), d);
          for (std::size_t c = 0; c < d; ++c) v[c] -= proj * dirs(j, c);
        }
      }
      double n = norm2(v.data(), d);
      if (n > 1e-10) {
        for (std::size_t c = 0; c < d; ++c) dirs(i, c) = v[c] / n;
        break;
      }
    }
  }

  auto n_train =
      static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(spc)));
  n_train = std::clamp<std::size_t>(n_train, 1, spc);

  SyntheticData data;
  const double sigma = 1.0 / spec.concentration;
  std::vector<std::vector<double>> rows_train, rows_test;
  std::vector<int> lab_train, lab_test;
  std::vector<double> x(d);
  for (std::size_t cls = 0; cls < k; ++cls) {
    for (std::size_t s = 0; s < spc; ++s) {
      for (std::size_t c = 0; c < d; ++c) {
        x[c] = dirs(cls, c) + sigma * rng.gaussian();
      }
      if (s < n_train) {
        rows_train.push_back(x);
        lab_train.push_back(static_cast<int>(cls));
      } else {
        rows_test.push_back(x);
        lab_test.push_back(static_cast<int>(cls));
      }
    }
  }
  auto pack = [d](const std::vector<std::vector<double>>& rows) {
    Mat m(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t c = 0; c < d; ++c) m(i, c) = rows[i][c];
    }
    return m;
  };
  data.train.inputs = pack(rows_train);
  data.train.labels = std::move(lab_train);
  data.test.inputs = pack(rows_test);
  data.test.labels = std::move(lab_test);
  data.class_directions = std::move(dirs);
  return data;
}

BackboneParams init_backbone(int input_dim, int hidden_dim, int embed_dim,
                             Rng& rng) {
  const auto in = static_cast<std::size_t>(input_dim);
  const auto hid = static_cast<std::size_t>(hidden_dim);
  const auto emb = static_cast<std::size_t>(embed_dim);
  BackboneParams p;
  p.w1 = Mat(hid, in);
  p.b1.assign(hid, 0.0);
  p.w2 = Mat(emb, hid);
  p.b2.assign(emb, 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hid));
  for (double& w : p.w1.a) w = s1 * rng.gaussian();
  for (double& w : p.w2.a) w = s2 * rng.gaussian();
  return p;
}

Mat backbone_forward(const BackboneParams& params, const Mat& inputs) {
  const std::size_t b = inputs.rows;
  const std::size_t in = inputs.cols;
  const std::size_t hid = params.w1.rows;
  const std::size_t emb = params.w2.rows;
  if (params.w1.cols != in || params.w2.cols != hid ||
      params.b1.size() != hid || params.b2.size() != emb) {
    throw DimensionMismatch("backbone_forward: shape mismatch");
  }
  Mat h(b, hid);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < hid; ++j) {
      double acc = params.b1[j];
      for (std::size_t c = 0; c < in; ++c) acc += inputs(i, c) * params.w1(j, c);
      h(i, j) = std::tanh(acc);
    }
  }
  Mat e(b, emb);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < emb; ++j) {
      double acc = params.b2[j];
      for (std::size_t c = 0; c < hid; ++c) acc += h(i, c) * params.w2(j, c);
      e(i, j) = acc;
    }
  }
  return e;
}

BackboneGrads backbone_backward(const BackboneParams& params, const Mat& inputs,
                                const Mat& grad_embeddings) {
  const std::size_t b = inputs.rows;
  const std::size_t in = inputs.cols;
  const std::size_t hid = params.w1.rows;
  const std::size_t emb = params.w2.rows;
  if (params.w1.cols != in || params.w2.cols != hid ||
      params.b1.size() != hid || params.b2.size() != emb ||
      grad_embeddings.rows != b || grad_embeddings.cols != emb) {
    throw DimensionMismatch("backbone_backward: shape mismatch");
  }
  // Recompute the hidden activations (cheap at this scale).
  Mat h(b, hid);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < hid; ++j) {
      double acc = params.b1[j];
      for (std::size_t c = 0; c < in; ++c) acc += inputs(i, c) * params.w1(j, c);
      h(i, j) = std::tanh(acc);
    }
  }
  BackboneGrads g;
  g.w2 = Mat(emb, hid);
  g.b2.assign(emb, 0.0);
  for (std::size_t j = 0; j < emb; ++j) {
    for (std::size_t i = 0; i < b; ++i) {
      const double ge = grad_embeddings(i, j);
      g.b2[j] += ge;
      for (std::size_t c = 0; c < hid; ++c) g.w2(j, c) += ge * h(i, c);
    }
  }
  // d(loss)/d(pre-activation) = (sum_j ge * w2) * (1 - h^2)
  Mat gpre(b, hid);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t c = 0; c < hid; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < emb; ++j) {
        acc += grad_embeddings(i, j) * params.w2(j, c);
      }
      gpre(i, c) = acc * (1.0 - h(i, c) * h(i, c));
    }
  }
  g.w1 = Mat(hid, in);
  g.b1.assign(hid, 0.0);
  g.inputs = Mat(b, in);
  for (std::size_t j = 0; j < hid; ++j) {
    for (std::size_t i = 0; i < b; ++i) {
      const double gp = gpre(i, j);
      g.b1[j] += gp;
      for (std::size_t c = 0; c < in; ++c) g.w1(j, c) += gp * inputs(i, c);
    }
  }
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t c = 0; c < in; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < hid; ++j) acc += gpre(i, j) * params.w1(j, c);
      g.inputs(i, c) = acc;
    }
  }
  return g;
}

void sgd_step(Mat& param, Mat& velocity, const Mat& grad, double lr,
              double momentum, double weight_decay) {
  if (param.rows != grad.rows || param.cols != grad.cols ||
      param.rows != velocity.rows || param.cols != velocity.cols) {
    throw DimensionMismatch("sgd_step: shape mismatch");
  }
  for (std::size_t i = 0; i < param.a.size(); ++i) {
    velocity.a[i] =
        momentum * velocity.a[i] + (grad.a[i] + weight_decay * param.a[i]);
    param.a[i] -= lr * velocity.a[i];
  }
}

void sgd_step(std::vector<double>& param, std::vector<double>& velocity,
              const std::vector<double>& grad, double lr, double momentum,
              double weight_decay) {
  if (param.size() != grad.size() || param.size() != velocity.size()) {
    throw DimensionMismatch("sgd_step: size mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    velocity[i] = momentum * velocity[i] + (grad[i] + weight_decay * param[i]);
    param[i] -= lr * velocity[i];
  }
}

TrainResult train(const TrainConfig& cfg, const Dataset& data) {
  validate(cfg);
  const std::size_t n = data.inputs.rows;
  if (n == 0) throw std::invalid_argument("train: empty dataset");
  if (data.labels.size() != n) {
    throw DimensionMismatch("train: label count does not match inputs");
  }
  if (!all_finite(data.inputs)) throw NonFiniteInput("train: inputs not finite");
  int max_label = 0;
  for (int y : data.labels) {
    if (y < 0) throw std::out_of_range("train: negative label");
    max_label = std::max(max_label, y);
  }
  const auto k = static_cast<std::size_t>(max_label + 1);
  const auto in_dim = data.inputs.cols;
  const auto emb = static_cast<std::size_t>(cfg.embed_dim);

  Rng rng(cfg.seed);
  TrainResult result;
  result.backbone = init_backbone(static_cast<int>(in_dim), cfg.hidden_dim,
                                  cfg.embed_dim, rng);
  result.weights.weights = Mat(k, emb);
  const double sw = 1.0 / std::sqrt(static_cast<double>(emb));
  for (double& w : result.weights.weights.a) w = sw * rng.gaussian();

  Mat vw1(result.backbone.w1.rows, result.backbone.w1.cols);
  std::vector<double> vb1(result.backbone.b1.size(), 0.0);
  Mat vw2(result.backbone.w2.rows, result.backbone.w2.cols);
  std::vector<double> vb2(result.backbone.b2.size(), 0.0);
  Mat vw(k, emb);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    int drops = 0;
    for (int e : cfg.lr_decay_epochs) drops += e <= epoch;
    const double lr = cfg.lr * std::pow(cfg.lr_decay_factor, drops);

    rng.shuffle(perm);
    double loss_sum = 0.0;
    std::vector<int> counts;
    counts.reserve(n);

    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t stop = std::min(start + bs, n);
      const std::size_t m = stop - start;
      Mat xb(m, in_dim);
      std::vector<int> yb(m);
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t src = perm[start + r];
        for (std::size_t c = 0; c < in_dim; ++c) xb(r, c) = data.inputs(src, c);
        yb[r] = data.labels[src];
      }
      EmbeddingBatch batch;
      batch.features = backbone_forward(result.backbone, xb);
      batch.labels = std::move(yb);
      LossOutput lo = loss_backward(batch, result.weights, cfg.loss);
      for (double l : lo.per_sample_loss) loss_sum += l;
      for (int c : lo.misclass_counts) counts.push_back(c);

      BackboneGrads bg =
          backbone_backward(result.backbone, xb, lo.grad_features);
      sgd_step(result.backbone.w1, vw1, bg.w1, lr, cfg.momentum,
               cfg.weight_decay);
      sgd_step(result.backbone.b1, vb1, bg.b1, lr, cfg.momentum,
               cfg.weight_decay);
      sgd_step(result.backbone.w2, vw2, bg.w2, lr, cfg.momentum,
               cfg.weight_decay);
      sgd_step(result.backbone.b2, vb2, bg.b2, lr, cfg.momentum,
               cfg.weight_decay);
      sgd_step(result.weights.weights, vw, lo.grad_weights, lr, cfg.momentum,
               cfg.weight_decay);
    }

    std::sort(counts.begin(), counts.end());
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.mean_loss = loss_sum / static_cast<double>(n);
    rec.median_misclass_count = counts[(counts.size() - 1) / 2];
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    result.log.push_back(rec);
  }
  return result;
}

}  // namespace mvsoft
