#ifndef SVARDAG_RNG_HPP
#define SVARDAG_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace svardag {

// ---------------------------------------------------------------------------
// Deterministic random draws built on std::mt19937_64 (a named, standardized
// engine with a 64-bit seed). The distribution transforms are spelled out
// here instead of using std:: distribution objects because the standard does
// not pin down their output sequences across implementations, while seeded
// reproducibility of masks, parameters and trajectories is part of this
// library's contract. Every transform below is a fixed closed-form map of
// engine output, so identical seeds give identical streams everywhere.
// ---------------------------------------------------------------------------
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on the open interval (0, 1): 53 random mantissa bits, offset by
  // half an ulp so 0 and 1 are unreachable (safe under log()).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n) by rejection, avoiding modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Fair sign in {-1.0, +1.0}.
  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached, so draws come in a fixed deterministic order.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Zero-mean Laplace with the given scale b (standard deviation b*sqrt(2)),
  // by inverse CDF.
  double laplace(double scale) {
    const double u = uniform01() - 0.5;
    return -scale * ((u < 0) ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(u));
  }

  // Student-t with integer df >= 1: Z / sqrt(chi2_df / df), the chi-square
  // accumulated as a sum of df squared standard normals. Unit scale (variance
  // df/(df-2) for df > 2).
  double student_t(int df) {
    const double z = normal();
    double chi2 = 0.0;
    for (int i = 0; i < df; ++i) {
      const double g = normal();
      chi2 += g * g;
    }
    return z / std::sqrt(chi2 / static_cast<double>(df));
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace svardag

#endif  // SVARDAG_RNG_HPP
