#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gradcheck_common.hpp"
#include "mvsoft/error.hpp"
#include "mvsoft/loss.hpp"
#include "mvsoft/rng.hpp"

using namespace mvsoft;
using mvsoft::testing::GradCase;

namespace {

// Instance with cosines taken literally (features on the axes, weights the
// requested unit rows) so loss values can be computed by hand.
struct Direct {
  EmbeddingBatch batch;
  ClassifierWeights weights;
};

// Batch of one sample with exactly the requested cosines: feature = e_0,
// weight row k = cos_k * e_0 + sqrt(1-cos_k^2) * e_{k+1}.
Direct from_cosines(const std::vector<double>& cosines, int label) {
  Direct d;
  const std::size_t k = cosines.size();
  const std::size_t dim = k + 1;
  d.batch.features = Mat(1, dim);
  d.batch.features(0, 0) = 1.0;
  d.batch.labels = {label};
  d.weights.weights = Mat(k, dim);
  for (std::size_t j = 0; j < k; ++j) {
    d.weights.weights(j, 0) = cosines[j];
    d.weights.weights(j, j + 1) =
        std::sqrt(std::max(0.0, 1.0 - cosines[j] * cosines[j]));
  }
  return d;
}

GradCase random_case(std::uint64_t seed, std::size_t b, std::size_t k,
                     std::size_t dim) {
  Rng rng(seed);
  GradCase gc;
  gc.batch.features = Mat(b, dim);
  for (double& v : gc.batch.features.a) v = rng.gaussian();
  gc.weights.weights = Mat(k, dim);
  for (double& v : gc.weights.weights.a) v = rng.gaussian();
  gc.batch.labels.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    gc.batch.labels[i] = static_cast<int>(rng.below(k));
  }
  return gc;
}

}  // namespace

TEST_CASE("plain softmax loss on a hand-computable instance") {
  // Two classes, s=1, cosines (1, 0), label 0: loss = log(1 + e^{-1}).
  Direct d = from_cosines({1.0, 0.0}, 0);
  LossConfig cfg;
  cfg.scale_s = 1.0;
  LossOutput out = loss_forward(d.batch, d.weights, cfg);
  CHECK(out.per_sample_loss[0] ==
        doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(out.mean_loss == out.per_sample_loss[0]);
  CHECK(out.p_y[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
  CHECK(out.misclass_counts[0] == 0);
}

TEST_CASE("indicator flags follow the margin decision") {
  const std::vector<int> label0{0};

  // f = 0.8 - 0.35 = 0.45 < 0.5: the second class is mis-classified.
  Mat c1(1, 2);
  c1(0, 0) = 0.8;
  c1(0, 1) = 0.5;
  Mat f1 = indicator(c1, label0, MarginSpec{1, 0.35, 0.0});
  CHECK(f1(0, 0) == 0.0);
  CHECK(f1(0, 1) == 1.0);

  // Exact boundary: f = 0.75 - 0.25 = 0.5 equals the competitor, flag stays 0.
  Mat c2(1, 2);
  c2(0, 0) = 0.75;
  c2(0, 1) = 0.5;
  Mat f2 = indicator(c2, label0, MarginSpec{1, 0.25, 0.0});
  CHECK(f2(0, 1) == 0.0);

  // Well-separated sample: nothing is flagged.
  Mat c3(1, 3);
  c3(0, 0) = 0.9;
  c3(0, 1) = 0.1;
  c3(0, 2) = 0.2;
  Mat f3 = indicator(c3, label0, MarginSpec{1, 0.0, 0.0});
  for (double v : f3.a) CHECK(v == 0.0);
}

TEST_CASE("reweight_h values") {
  Mat cos(1, 2);
  cos(0, 0) = 0.8;
  cos(0, 1) = 0.5;
  Mat flags(1, 2);
  flags(0, 1) = 1.0;
  const std::vector<int> labels{0};

  Mat h_off = reweight_h(cos, flags, labels, 32.0, 0.2, MvMode::off);
  CHECK(h_off(0, 1) == 1.0);

  Mat h0 = reweight_h(cos, flags, labels, 32.0, 0.0, MvMode::fixed);
  CHECK(h0(0, 1) == 1.0);  // t = 0 collapses the exponent

  Mat hf = reweight_h(cos, flags, labels, 32.0, 0.2, MvMode::fixed);
  CHECK(hf(0, 0) == 1.0);  // target column untouched
  CHECK(hf(0, 1) == doctest::Approx(std::exp(6.4)).epsilon(1e-13));
  CHECK(hf(0, 1) == doctest::Approx(601.8450378720822).epsilon(1e-12));

  Mat ha = reweight_h(cos, flags, labels, 32.0, 0.2, MvMode::adaptive);
  CHECK(ha(0, 1) == doctest::Approx(std::exp(32.0 * 0.2 * 1.5)).epsilon(1e-13));

  Mat unflagged(1, 2);
  Mat hu = reweight_h(cos, unflagged, labels, 32.0, 0.2, MvMode::adaptive);
  CHECK(hu(0, 1) == 1.0);
}

TEST_CASE("modified_logits shifts only flagged competitors") {
  Mat cos(1, 2);
  cos(0, 0) = 0.8;
  cos(0, 1) = 0.5;
  const std::vector<int> labels{0};
  LossConfig cfg;
  cfg.margin = MarginSpec{1, 0.35, 0.0};
  Mat flags = indicator(cos, labels, cfg.margin);
  CHECK(flags(0, 1) == 1.0);

  cfg.mv_mode = MvMode::fixed;
  cfg.t = 0.25;
  Mat mf = modified_logits(cos, flags, labels, cfg);
  CHECK(mf(0, 0) == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(mf(0, 1) == 0.75);

  cfg.mv_mode = MvMode::adaptive;
  cfg.t = 0.2;
  Mat ma = modified_logits(cos, flags, labels, cfg);
  CHECK(ma(0, 1) == doctest::Approx(0.8).epsilon(1e-15));

  // A class that is not mis-classified keeps its cosine in every mode.
  Mat cos2(1, 2);
  cos2(0, 0) = 0.8;
  cos2(0, 1) = 0.3;
  Mat flags2 = indicator(cos2, labels, cfg.margin);
  CHECK(flags2(0, 1) == 0.0);
  Mat m2 = modified_logits(cos2, flags2, labels, cfg);
  CHECK(m2(0, 1) == 0.3);
}

TEST_CASE("t = 0 reduces re-weighting to the margin-only loss") {
  for (int trial = 0; trial < 20; ++trial) {
    GradCase gc = random_case(100 + trial, 5, 6, 8);
    LossConfig margin_only;
    margin_only.scale_s = 16.0;
    margin_only.margin = MarginSpec{1, 0.35, 0.0};
    LossConfig mv = margin_only;
    mv.t = 0.0;
    for (MvMode mode : {MvMode::fixed, MvMode::adaptive}) {
      mv.mv_mode = mode;
      LossOutput a = loss_forward(gc.batch, gc.weights, margin_only);
      LossOutput b = loss_forward(gc.batch, gc.weights, mv);
      for (std::size_t i = 0; i < a.per_sample_loss.size(); ++i) {
        CHECK(std::abs(a.per_sample_loss[i] - b.per_sample_loss[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("re-weighting never lowers the loss and bites exactly when flagged") {
  int flagged_seen = 0, clean_seen = 0;
  for (int trial = 0; trial < 50; ++trial) {
    GradCase gc = random_case(300 + trial, 6, 5, 8);
    LossConfig margin_only;
    margin_only.scale_s = 24.0;
    margin_only.margin = MarginSpec{1, 0.35, 0.0};
    LossConfig mv = margin_only;
    mv.mv_mode = trial % 2 ? MvMode::fixed : MvMode::adaptive;
    mv.t = 0.3;
    LossOutput a = loss_forward(gc.batch, gc.weights, margin_only);
    LossOutput b = loss_forward(gc.batch, gc.weights, mv);
    for (std::size_t i = 0; i < a.per_sample_loss.size(); ++i) {
      if (b.misclass_counts[i] > 0) {
        CHECK(b.per_sample_loss[i] > a.per_sample_loss[i]);
        ++flagged_seen;
      } else {
        CHECK(b.per_sample_loss[i] == a.per_sample_loss[i]);
        ++clean_seen;
      }
    }
  }
  CHECK(flagged_seen > 20);  // the sample actually exercised both branches
  CHECK(clean_seen >= 10);   // clean rows are rare under an 0.35 margin
}

TEST_CASE("literal quotient form agrees with the logit-shift path") {
  for (int trial = 0; trial < 30; ++trial) {
    GradCase gc = random_case(500 + trial, 4, 6, 10);
    LossConfig cfg;
    cfg.scale_s = 4.0 + trial;
    cfg.margin = trial % 2 ? MarginSpec{1, 0.35, 0.0} : MarginSpec{1, 0.0, 0.5};
    cfg.mv_mode = trial % 2 ? MvMode::fixed : MvMode::adaptive;
    cfg.t = 0.25;

    CosineLogits cl = cosine_logits(gc.batch, gc.weights);
    Mat flags = indicator(cl.cosines, gc.batch.labels, cfg.margin);
    Mat h = reweight_h(cl.cosines, flags, gc.batch.labels, cfg.scale_s, cfg.t,
                       cfg.mv_mode);
    LossOutput out = loss_forward(gc.batch, gc.weights, cfg);

    for (std::size_t i = 0; i < cl.cosines.rows; ++i) {
      const auto y = static_cast<std::size_t>(gc.batch.labels[i]);
      long double num = std::exp(
          static_cast<long double>(cfg.scale_s) *
          static_cast<long double>(margin_forward(cl.cosines(i, y), cfg.margin)));
      long double den = num;
      for (std::size_t k = 0; k < cl.cosines.cols; ++k) {
        if (k == y) continue;
        long double hk = 1.0L;
        if (flags(i, k) != 0.0) {
          hk = cfg.mv_mode == MvMode::fixed
                   ? std::exp(static_cast<long double>(cfg.scale_s * cfg.t))
                   : std::exp(static_cast<long double>(cfg.scale_s) * cfg.t *
                              (static_cast<long double>(cl.cosines(i, k)) + 1.0L));
          // the double-precision h must agree with the long-double one
          CHECK(std::abs(static_cast<double>(hk) - h(i, k)) /
                    h(i, k) < 1e-12);
        }
        den += hk * std::exp(static_cast<long double>(cfg.scale_s) *
                             static_cast<long double>(cl.cosines(i, k)));
      }
      const double literal = static_cast<double>(-std::log(num / den));
      CHECK(std::abs(literal - out.per_sample_loss[i]) /
                std::max(1.0, std::abs(literal)) <
            1e-12);
    }
  }
}

TEST_CASE("loss output ranges on random instances") {
  for (int trial = 0; trial < 10; ++trial) {
    GradCase gc = random_case(700 + trial, 8, 7, 9);
    LossConfig cfg;
    cfg.scale_s = 32.0;
    cfg.margin = MarginSpec{1, 0.2, 0.3};
    cfg.mv_mode = MvMode::adaptive;
    cfg.t = 0.2;
    LossOutput out = loss_backward(gc.batch, gc.weights, cfg);
    CHECK(out.per_sample_loss.size() == 8);
    double mean = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(out.per_sample_loss[i] >= 0.0);
      CHECK(out.p_y[i] > 0.0);
      CHECK(out.p_y[i] < 1.0);
      CHECK(out.misclass_counts[i] >= 0);
      CHECK(out.misclass_counts[i] <= 6);
      mean += out.per_sample_loss[i];
    }
    CHECK(out.mean_loss == doctest::Approx(mean / 8.0).epsilon(1e-15));
    CHECK(all_finite(out.grad_features));
    CHECK(all_finite(out.grad_weights));
  }
}

TEST_CASE("feature gradients are orthogonal to their feature") {
  GradCase gc = random_case(900, 6, 5, 7);
  LossConfig cfg;
  cfg.scale_s = 16.0;
  LossOutput out = loss_backward(gc.batch, gc.weights, cfg);
  for (std::size_t i = 0; i < 6; ++i) {
    double radial = dot(out.grad_features.row(i), gc.batch.features.row(i), 7);
    double scale = norm2(out.grad_features.row(i), 7) *
                   norm2(gc.batch.features.row(i), 7);
    CHECK(std::abs(radial) <= 1e-10 * std::max(1.0, scale));
  }
}

TEST_CASE("focal at gamma 0 and hard mining at keep_ratio 1 are the identity") {
  GradCase gc = random_case(1100, 5, 6, 8);
  LossConfig base;
  base.scale_s = 20.0;
  base.margin = MarginSpec{1, 0.0, 0.5};

  LossConfig focal = base;
  focal.mining = MiningSpec{MiningKind::focal, 0.0, 1.0};
  LossConfig hard = base;
  hard.mining = MiningSpec{MiningKind::hard, 0.0, 1.0};

  LossOutput a = loss_backward(gc.batch, gc.weights, base);
  LossOutput b = loss_backward(gc.batch, gc.weights, focal);
  LossOutput c = loss_backward(gc.batch, gc.weights, hard);
  for (std::size_t i = 0; i < a.per_sample_loss.size(); ++i) {
    CHECK(a.per_sample_loss[i] == b.per_sample_loss[i]);
    CHECK(a.per_sample_loss[i] == c.per_sample_loss[i]);
  }
  for (std::size_t i = 0; i < a.grad_features.a.size(); ++i) {
    CHECK(a.grad_features.a[i] == b.grad_features.a[i]);
    CHECK(a.grad_features.a[i] == c.grad_features.a[i]);
  }
}

TEST_CASE("dropped samples contribute neither loss nor feature gradient") {
  GradCase gc = random_case(1300, 8, 6, 8);
  LossConfig cfg;
  cfg.scale_s = 16.0;
  cfg.mining = MiningSpec{MiningKind::hard, 0.0, 0.5};
  PinnedState st = pin_state(gc.batch, gc.weights, cfg);
  LossOutput out = loss_backward(gc.batch, gc.weights, cfg);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    if (st.keep[i]) {
      ++kept;
      continue;
    }
    CHECK(out.per_sample_loss[i] == 0.0);
    for (std::size_t c = 0; c < 8; ++c) CHECK(out.grad_features(i, c) == 0.0);
  }
  CHECK(kept == 4);
}

TEST_CASE("loss input validation") {
  GradCase gc = random_case(1500, 3, 4, 6);
  LossConfig cfg;

  LossConfig bad_s = cfg;
  bad_s.scale_s = 0.0;
  CHECK_THROWS_AS(loss_forward(gc.batch, gc.weights, bad_s),
                  std::invalid_argument);

  LossConfig bad_t = cfg;
  bad_t.t = -0.1;
  CHECK_THROWS_AS(loss_forward(gc.batch, gc.weights, bad_t),
                  std::invalid_argument);

  EmbeddingBatch bad_label = gc.batch;
  bad_label.labels[0] = 4;
  CHECK_THROWS_AS(loss_forward(bad_label, gc.weights, cfg), std::out_of_range);

  EmbeddingBatch bad_count = gc.batch;
  bad_count.labels.pop_back();
  CHECK_THROWS_AS(loss_forward(bad_count, gc.weights, cfg), DimensionMismatch);

  EmbeddingBatch nan_batch = gc.batch;
  nan_batch.features(0, 0) = std::nan("");
  CHECK_THROWS_AS(loss_forward(nan_batch, gc.weights, cfg), NonFiniteInput);

  ClassifierWeights wrong_dim;
  wrong_dim.weights = Mat(4, 5, 0.5);
  CHECK_THROWS_AS(loss_forward(gc.batch, wrong_dim, cfg), DimensionMismatch);

  EmbeddingBatch empty;
  empty.features = Mat(0, 6);
  CHECK_THROWS_AS(loss_forward(empty, gc.weights, cfg), std::invalid_argument);
}

TEST_CASE("pinned forward reproduces the unpinned one at the base point") {
  GradCase gc = random_case(1700, 5, 6, 8);
  LossConfig cfg;
  cfg.scale_s = 24.0;
  cfg.margin = MarginSpec{1, 0.35, 0.0};
  cfg.mv_mode = MvMode::adaptive;
  cfg.t = 0.2;
  cfg.mining = MiningSpec{MiningKind::hard, 0.0, 0.8};
  PinnedState st = pin_state(gc.batch, gc.weights, cfg);
  LossOutput a = loss_forward(gc.batch, gc.weights, cfg);
  LossOutput b = loss_forward_pinned(gc.batch, gc.weights, cfg, st);
  for (std::size_t i = 0; i < a.per_sample_loss.size(); ++i) {
    CHECK(a.per_sample_loss[i] == b.per_sample_loss[i]);
  }
}
