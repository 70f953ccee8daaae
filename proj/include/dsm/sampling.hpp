#pragma once

#include <cstdint>
#include <random>

#include "dsm/scale.hpp"

namespace dsm {

/// Highest frequency k in the cos(kπx)/sin(kπx) test polynomials.
inline constexpr int kMaxTestFrequency = 8;

/// Random stream for sample `index` of a run seeded with `seed`.
///
/// Sample i depends only on (seed, i), so a run with more samples sees a superset of the
/// points of a shorter run with the same seed.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t index);

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Σ_{k=0..max_k} a_k cos(kπx) + b_k sin(kπx) with a_k, b_k uniform on [-1, 1).
    GridFunction trig_polynomial(std::size_t n, int max_k = kMaxTestFrequency);
    /// Same, with only the sine terms (vanishes at x = 0).
    GridFunction sine_polynomial(std::size_t n);

    /// center + s·R·p/||p||_a with p a trig polynomial and s uniform on (0, 1].
    GridFunction point_in_ball(const GridFunction& center, double radius, ScaleIndex a,
                               int max_k = kMaxTestFrequency);
    /// Trig polynomial rescaled to ||q||_a = 1.
    GridFunction unit_direction(std::size_t n, ScaleIndex a, int max_k = kMaxTestFrequency);

private:
    std::mt19937_64 engine_;
};

}  // namespace dsm
