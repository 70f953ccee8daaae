#include "dsm/sampling.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dsm {

namespace {

std::seed_seq make_seed(std::uint64_t seed, std::uint64_t index) {
    return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
}

GridFunction rescaled(const GridFunction& p, double target, ScaleIndex a) {
    const double norm = sobolev_norm(p, a);
    if (norm == 0.0) {
        return p;
    }
    return (target / norm) * p;
}

}  // namespace

SampleStream::SampleStream(std::uint64_t seed, std::uint64_t index) {
    auto seq = make_seed(seed, index);
    engine_.seed(seq);
}

double SampleStream::uniform() {
    // 53 random mantissa bits; independent of the standard library's distribution implementation.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

GridFunction SampleStream::trig_polynomial(std::size_t n, int max_k) {
    if (max_k < 0 || max_k > kMaxTestFrequency) {
        throw std::invalid_argument("test frequency must lie in [0, 8]");
    }
    std::array<double, kMaxTestFrequency + 1> cos_coef{};
    std::array<double, kMaxTestFrequency + 1> sin_coef{};
    for (int k = 0; k <= max_k; ++k) {
        cos_coef[k] = uniform(-1.0, 1.0);
        sin_coef[k] = uniform(-1.0, 1.0);
    }
    return GridFunction::sample(n, [&](double x) {
        double s = 0.0;
        for (int k = 0; k <= max_k; ++k) {
            const double w = k * std::numbers::pi * x;
            s += cos_coef[k] * std::cos(w) + sin_coef[k] * std::sin(w);
        }
        return s;
    });
}

GridFunction SampleStream::sine_polynomial(std::size_t n) {
    std::array<double, kMaxTestFrequency + 1> coef{};
    for (int k = 1; k <= kMaxTestFrequency; ++k) {
        coef[k] = uniform(-1.0, 1.0);
    }
    return GridFunction::sample(n, [&](double x) {
        double s = 0.0;
        for (int k = 1; k <= kMaxTestFrequency; ++k) {
            s += coef[k] * std::sin(k * std::numbers::pi * x);
        }
        return s;
    });
}

GridFunction SampleStream::point_in_ball(const GridFunction& center, double radius, ScaleIndex a, int max_k) {
    const GridFunction p = trig_polynomial(center.size(), max_k);
    const double fraction = 1.0 - uniform();
    return center + rescaled(p, fraction * radius, a);
}

GridFunction SampleStream::unit_direction(std::size_t n, ScaleIndex a, int max_k) {
    return rescaled(trig_polynomial(n, max_k), 1.0, a);
}

}  // namespace dsm
