#ifndef MVSOFT_MARGINS_HPP_
#define MVSOFT_MARGINS_HPP_

namespace mvsoft {

// Combined margin cos(m1*theta + m3) - m2 applied to the target-class
// cosine. Special cases: angular (m1 > 1), additive-cosine (m2 > 0),
// additive-angle (m3 > 0), plain softmax (1, 0, 0).
struct MarginSpec {
  int m1 = 1;       // integer angular multiplier, >= 1
  double m2 = 0.0;  // additive cosine margin, in [0, 1)
  double m3 = 0.0;  // additive angle margin in radians, in [0, pi/2)
};

void validate(const MarginSpec& spec);

// f(cos theta) = cos(m1*theta + m3) - m2, evaluated arccos-free through
// Chebyshev polynomials in cos theta. Throws InvalidCosine outside [-1, 1].
double margin_forward(double cos_theta, const MarginSpec& spec);

// d f / d cos(theta) = m1 * sin(m1*theta + m3) / sin(theta).
// Total: within 1e-8 of |cos theta| = 1 the analytic limit of the bounded
// part is returned instead (m1^2 * cos(m3) at +1, sign-alternating at -1),
// so gradient checks never see NaN.
double margin_backward(double cos_theta, const MarginSpec& spec);

}  // namespace mvsoft

#endif  // MVSOFT_MARGINS_HPP_
