// SPDX-License-Identifier: Apache-2.0
#ifndef GRBF_RNG_HPP
#define GRBF_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include "grbf/types.hpp"

namespace grbf {

/// Seeded random source with explicit sampling formulas so that a given
/// seed produces the same stream on every platform (std distributions are
/// implementation defined; we avoid them).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() {
        // 53-bit mantissa from the top bits of a 64-bit draw
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; one spare value is cached.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Circular complex Gaussian with E|z|^2 = 1.
    Complex cgauss() {
        const double s = 1.0 / std::sqrt(2.0);
        double re = gauss();
        double im = gauss();
        return Complex(s * re, s * im);
    }

    std::uint64_t integer() { return engine_(); }

    std::uint64_t integer(std::uint64_t n) { return engine_() % n; }

    /// Independent child stream `id`; deterministic in (seed, id).
    Rng fork(std::uint64_t id) const {
        std::uint64_t x = seed_ + 0x9e3779b97f4a7c15ULL * (id + 1);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return Rng(x);
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace grbf

#endif
