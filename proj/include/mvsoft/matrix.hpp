#ifndef MVSOFT_MATRIX_HPP_
#define MVSOFT_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

namespace mvsoft {

// Dense row-major matrix of doubles. All numerics in this library are
// 64-bit; see the loss gradient tolerances for why.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }
  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }
  std::size_t size() const { return a.size(); }
};

inline double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

inline double norm2(const double* x, std::size_t n) {
  return std::sqrt(dot(x, x, n));
}

inline bool all_finite(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

inline bool all_finite(const Mat& m) { return all_finite(m.a.data(), m.size()); }

inline bool all_finite(const std::vector<double>& v) {
  return all_finite(v.data(), v.size());
}

}  // namespace mvsoft

#endif  // MVSOFT_MATRIX_HPP_
