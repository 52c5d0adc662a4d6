#ifndef MVSOFT_RNG_HPP_
#define MVSOFT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mvsoft {

// mt19937_64 with hand-rolled output transforms. The standard
// distributions are implementation-defined, so seeded runs would not be
// reproducible across standard libraries; these transforms are fully
// specified and keep artifacts byte-identical for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second deviate is cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mvsoft

#endif  // MVSOFT_RNG_HPP_
