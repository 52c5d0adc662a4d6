#include "mvsoft/margins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvsoft/error.hpp"

namespace mvsoft {

namespace {

constexpr double kHalfPi = 1.5707963267948966192313216916398;
constexpr double kEndpointBand = 1e-8;

// First-kind Chebyshev: T_n(cos t) = cos(n t).
double cheb_t(int n, double c) {
  if (n == 0) return 1.0;
  double tm1 = 1.0, t = c;
  for (int i = 1; i < n; ++i) {
    double next = 2.0 * c * t - tm1;
    tm1 = t;
    t = next;
  }
  return t;
}

// Second-kind Chebyshev: U_n(cos t) = sin((n + 1) t) / sin(t).
double cheb_u(int n, double c) {
  if (n < 0) return 0.0;
  if (n == 0) return 1.0;
  double um1 = 1.0, u = 2.0 * c;
  for (int i = 1; i < n; ++i) {
    double next = 2.0 * c * u - um1;
    um1 = u;
    u = next;
  }
  return u;
}

}  // namespace

void validate(const MarginSpec& spec) {
  if (spec.m1 < 1) {
    throw std::invalid_argument("MarginSpec: m1 must be a positive integer");
  }
  if (!(spec.m2 >= 0.0 && spec.m2 < 1.0)) {
    throw std::invalid_argument("MarginSpec: m2 must lie in [0, 1)");
  }
  if (!(spec.m3 >= 0.0 && spec.m3 < kHalfPi)) {
    throw std::invalid_argument("MarginSpec: m3 must lie in [0, pi/2)");
  }
}

double margin_forward(double cos_theta, const MarginSpec& spec) {
  validate(spec);
  if (!(cos_theta >= -1.0 && cos_theta <= 1.0)) {
    throw InvalidCosine("margin_forward: cos theta outside [-1, 1]");
  }
  double sin_theta = std::sqrt(std::max(0.0, (1.0 - cos_theta) * (1.0 + cos_theta)));
  if (spec.m1 == 1) {
    return cos_theta * std::cos(spec.m3) - sin_theta * std::sin(spec.m3) - spec.m2;
  }
  // cos(m1 t + m3) = T_m1(c) cos(m3) - sin(t) U_{m1-1}(c) sin(m3)
  return cheb_t(spec.m1, cos_theta) * std::cos(spec.m3) -
         sin_theta * cheb_u(spec.m1 - 1, cos_theta) * std::sin(spec.m3) -
         spec.m2;
}

double margin_backward(double cos_theta, const MarginSpec& spec) {
  validate(spec);
  double c = std::clamp(cos_theta, -1.0, 1.0);
  if (1.0 - std::fabs(c) <= kEndpointBand) {
    // sin(theta) -> 0; keep the bounded part of the derivative. For m3 = 0
    // this is the true limit m1^2 (alternating sign at -1), for the
    // additive-angle case it degrades to cos(m3).
    double c_end = c > 0.0 ? 1.0 : -1.0;
    return static_cast<double>(spec.m1) * cheb_u(spec.m1 - 1, c_end) *
           std::cos(spec.m3);
  }
  double sin_theta = std::sqrt((1.0 - c) * (1.0 + c));
  // d/dc cos(m1 t + m3) = m1 sin(m1 t + m3) / sin(t)
  //                     = m1 [U_{m1-1}(c) cos(m3) + T_m1(c) sin(m3) / sin(t)]
  return static_cast<double>(spec.m1) *
         (cheb_u(spec.m1 - 1, c) * std::cos(spec.m3) +
          cheb_t(spec.m1, c) * std::sin(spec.m3) / sin_theta);
}

}  // namespace mvsoft
