#include "ayn/rng.hpp"

#include <cmath>

#include "ayn/error.hpp"

namespace ayn {

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw Error("range", "Rng::index: n must be positive");
    // Rejection sampling keeps the draw unbiased for any n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 of (seed, stream); decorrelates nearby (seed, stream) pairs.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return Rng(z);
}

void init_uniform_glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    if (fan_in + fan_out == 0) throw Error("range", "glorot init: fan_in + fan_out must be positive");
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : t.data) x = rng.uniform(-a, a);
}

}  // namespace ayn
