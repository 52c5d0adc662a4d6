#ifndef MVSOFT_GEOMETRY_HPP_
#define MVSOFT_GEOMETRY_HPP_

#include <utility>
#include <vector>

#include "mvsoft/matrix.hpp"

namespace mvsoft {

// Rows with Euclidean norm below this are rejected rather than divided out.
constexpr double kNormEpsilon = 1e-12;

// B x d raw (pre-normalization) feature vectors with labels in [0, K).
struct EmbeddingBatch {
  Mat features;
  std::vector<int> labels;
};

// K x d raw class vectors, one row per class; consumed row-normalized.
struct ClassifierWeights {
  Mat weights;
};

// Cosine similarities between unit features and unit class vectors,
// clamped to [-1, 1], plus the original norms.
struct CosineLogits {
  Mat cosines;  // B x K
  std::vector<double> row_feature_norms;
  std::vector<double> col_weight_norms;
};

// Returns the row-unit matrix and the original row norms.
// Throws NonFiniteInput on NaN/Inf entries, DegenerateNorm on rows with
// norm below kNormEpsilon.
std::pair<Mat, std::vector<double>> normalize_rows(const Mat& m);

// cosines[i][k] = <x_i / |x_i|, w_k / |w_k|>, clamped to [-1, 1].
CosineLogits cosine_logits(const EmbeddingBatch& batch,
                           const ClassifierWeights& w);

// Exact chain rule through x -> x / |x|:
//   grad_raw = (I - u u^T) grad_unit / |x|,  u = x / |x|.
// The result is orthogonal to u.
std::vector<double> normalize_backward(const std::vector<double>& raw_row,
                                       const std::vector<double>& grad_wrt_unit);

}  // namespace mvsoft

#endif  // MVSOFT_GEOMETRY_HPP_
