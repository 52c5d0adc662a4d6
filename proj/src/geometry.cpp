#include "mvsoft/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "mvsoft/error.hpp"

namespace mvsoft {

std::pair<Mat, std::vector<double>> normalize_rows(const Mat& m) {
  if (!all_finite(m)) {
    throw NonFiniteInput("normalize_rows: non-finite entry");
  }
  Mat unit(m.rows, m.cols);
  std::vector<double> norms(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* x = m.row(i);
    double n = norm2(x, m.cols);
    if (n < kNormEpsilon) {
      throw DegenerateNorm("normalize_rows: row norm below epsilon");
    }
    norms[i] = n;
    double inv = 1.0 / n;
    double* u = unit.row(i);
    for (std::size_t j = 0; j < m.cols; ++j) u[j] = x[j] * inv;
  }
  return {std::move(unit), std::move(norms)};
}

CosineLogits cosine_logits(const EmbeddingBatch& batch,
                           const ClassifierWeights& w) {
  if (batch.features.cols != w.weights.cols) {
    throw DimensionMismatch("cosine_logits: feature dim != weight dim");
  }
  auto [xu, xn] = normalize_rows(batch.features);
  auto [wu, wn] = normalize_rows(w.weights);

  const std::size_t b = xu.rows, k = wu.rows, d = xu.cols;
  CosineLogits out;
  out.cosines = Mat(b, k);
  out.row_feature_norms = std::move(xn);
  out.col_weight_norms = std::move(wn);
  for (std::size_t i = 0; i < b; ++i) {
    const double* xi = xu.row(i);
    double* ci = out.cosines.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      double c = dot(xi, wu.row(j), d);
      ci[j] = std::clamp(c, -1.0, 1.0);
    }
  }
  return out;
}

std::vector<double> normalize_backward(const std::vector<double>& raw_row,
                                       const std::vector<double>& grad_wrt_unit) {
  if (raw_row.size() != grad_wrt_unit.size()) {
    throw DimensionMismatch("normalize_backward: size mismatch");
  }
  const std::size_t d = raw_row.size();
  double n = norm2(raw_row.data(), d);
  if (n < kNormEpsilon) {
    throw DegenerateNorm("normalize_backward: row norm below epsilon");
  }
  double inv = 1.0 / n;
  // radial = <g, u>, subtracted so only the tangential part survives
  double radial = 0.0;
  for (std::size_t j = 0; j < d; ++j) radial += grad_wrt_unit[j] * raw_row[j] * inv;
  std::vector<double> out(d);
  for (std::size_t j = 0; j < d; ++j) {
    out[j] = (grad_wrt_unit[j] - radial * raw_row[j] * inv) * inv;
  }
  return out;
}

}  // namespace mvsoft
