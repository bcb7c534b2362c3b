#pragma once

#include <cstdint>

#include "incompat/linmap.hpp"

namespace incompat {

// Counter-based generator: draw k of stream s is a pure function of (seed, s, k),
// so results do not depend on call order or thread scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : m_key(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ull))) {}

    std::uint64_t at(std::uint64_t counter) const { return mix(m_key + counter * 0x9E3779B97F4A7C15ull); }

    std::uint64_t next() { return at(m_counter++); }

    // Uniform in [0, 1).
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t m_key;
    std::uint64_t m_counter = 0;
};

inline Mat2d random_matrix(CounterRng &rng, double scale = 2.0) {
    Mat2d A;
    A << rng.uniform(-scale, scale), rng.uniform(-scale, scale),
         rng.uniform(-scale, scale), rng.uniform(-scale, scale);
    return A;
}

// SPD metric with eigenvalues roughly in [0.1, 5].
inline InnerProduct2d random_metric(CounterRng &rng) {
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const Mat2d R = rotation(angle);
    const Eigen::Vector2d lambda(rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0));
    Mat2d G = R * lambda.asDiagonal() * R.transpose();
    G(1, 0) = G(0, 1);
    return InnerProduct2d(G);
}

} // namespace incompat
