#ifndef MVSOFT_TRAINER_HPP_
#define MVSOFT_TRAINER_HPP_

#include <cstdint>
#include <vector>

#include "mvsoft/loss.hpp"
#include "mvsoft/matrix.hpp"
#include "mvsoft/rng.hpp"

namespace mvsoft {

struct TrainConfig {
  int epochs = 12;
  int batch_size = 128;
  double lr = 0.1;
  std::vector<int> lr_decay_epochs{4, 8, 10};
  double lr_decay_factor = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::uint64_t seed = 1;
  LossConfig loss;
  int hidden_dim = 64;
  int embed_dim = 32;
};

void validate(const TrainConfig& cfg);

struct Dataset {
  Mat inputs;               // N x input_dim
  std::vector<int> labels;  // N
};

struct SyntheticSpec {
  int num_classes = 8;
  int samples_per_class = 100;
  int input_dim = 32;
  std::uint64_t seed = 7;
  double concentration = 20.0;  // per-coordinate noise std is 1/concentration
  double train_fraction = 0.8;
};

void validate(const SyntheticSpec& spec);

struct SyntheticData {
  Dataset train;
  Dataset test;
  Mat class_directions;  // K x input_dim, unit rows
};

// K unit class directions (Gram-Schmidt orthonormalised when input_dim >= K),
// each sample = its class direction + Gaussian noise / concentration.
// Per class, the first round(train_fraction * samples_per_class) samples go
// to train, the rest to test. Fully determined by spec.seed.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Two-layer perceptron: embedding = w2 * tanh(w1 * x + b1) + b2.
struct BackboneParams {
  Mat w1;                  // hidden x input
  std::vector<double> b1;  // hidden
  Mat w2;                  // embed x hidden
  std::vector<double> b2;  // embed
};

BackboneParams init_backbone(int input_dim, int hidden_dim, int embed_dim,
                             Rng& rng);

Mat backbone_forward(const BackboneParams& params, const Mat& inputs);

struct BackboneGrads {
  Mat w1;
  std::vector<double> b1;
  Mat w2;
  std::vector<double> b2;
  Mat inputs;  // gradient w.r.t. the raw inputs
};

BackboneGrads backbone_backward(const BackboneParams& params, const Mat& inputs,
                                const Mat& grad_embeddings);

// v <- momentum * v + (grad + weight_decay * param); param <- param - lr * v
void sgd_step(Mat& param, Mat& velocity, const Mat& grad, double lr,
              double momentum, double weight_decay);
void sgd_step(std::vector<double>& param, std::vector<double>& velocity,
              const std::vector<double>& grad, double lr, double momentum,
              double weight_decay);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double mean_loss = 0.0;
  int median_misclass_count = 0;
  std::int64_t wall_ms = 0;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  BackboneParams backbone;
  ClassifierWeights weights;
};

// One shuffled pass per epoch, loss forward/backward on the embeddings, SGD
// with momentum on both the backbone and the class weights, learning rate
// divided by 1/lr_decay_factor at each configured epoch. Apart from wall_ms,
// the result is a deterministic function of (cfg, data).
TrainResult train(const TrainConfig& cfg, const Dataset& data);

}  // namespace mvsoft

#endif  // MVSOFT_TRAINER_HPP_
