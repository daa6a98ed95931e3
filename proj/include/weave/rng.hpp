#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace weave {

// Deterministic RNG used everywhere seeds matter. std::mt19937_64 is
// bit-stable across platforms, but the standard distributions are not, so
// the distributions are implemented here by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    // Standard normal via Box-Muller; one value per call, fixed formula.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) {
        return mean + stddev * normal();
    }

    // Fisher-Yates, fixed iteration order.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent stream, e.g. per record or per fixture word.
    Rng fork(std::uint64_t salt) {
        std::uint64_t s = engine_() ^ (salt * 0x9E3779B97F4A7C15ull);
        return Rng(s);
    }

    // Seed for an independent child stream.
    std::uint64_t fork_seed() { return engine_() ^ 0x9E3779B97F4A7C15ull; }

private:
    std::mt19937_64 engine_;
};

} // namespace weave
