#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ayn/tensor.hpp"

namespace ayn {

/// Deterministic 64-bit-seeded generator. The engine (mt19937_64) is
/// pinned by the C++ standard and the real-valued mappings below avoid
/// std distributions, whose output is implementation-defined, so any
/// two builds replay identical streams. Identified as "ayn-rng-v1" in
/// run metadata.
class Rng {
public:
    static constexpr const char* kName = "ayn-rng-v1";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    /// Standard normal via Box-Muller on the pinned uniform stream.
    double normal();

    /// Derive an independent stream (e.g. per epoch) from this seed.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Fill with uniform values in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
void init_uniform_glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace ayn
