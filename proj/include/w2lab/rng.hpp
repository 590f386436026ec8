#pragma once
#include <cstdint>
#include <cmath>

namespace w2lab {

// Counter-based random stream (Philox2x64-10). A stream is identified by
// (seed, stream index); the sample sequence depends only on that pair, so
// trials can run in any order or in parallel without changing results.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_index)
        : key_(seed), hi_(stream_index), lo_(0) {}

    std::uint64_t seed() const { return key_; }
    std::uint64_t stream_index() const { return hi_; }

    std::uint64_t next_u64() {
        std::uint64_t x0 = lo_++, x1 = hi_, k = key_;
        for (int round = 0; round < 10; ++round) {
            const unsigned __int128 prod =
                static_cast<unsigned __int128>(0xD2B74407B1CE6E93ULL) * x0;
            const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            const std::uint64_t lo = static_cast<std::uint64_t>(prod);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += 0x9E3779B97F4A7C15ULL;
        }
        return x0 ^ x1;
    }

    /// Uniform double in [0, 1).
    double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller; pairs are cached.
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Poisson count with mean lambda >= 0. Exact: the mean is split into
    /// chunks small enough for the product-of-uniforms method.
    std::uint64_t poisson(double lambda) {
        std::uint64_t total = 0;
        while (lambda > 0.0) {
            const double chunk = lambda > 30.0 ? 30.0 : lambda;
            lambda -= chunk;
            const double threshold = std::exp(-chunk);
            double prod = uniform();
            std::uint64_t k = 0;
            while (prod > threshold) {
                ++k;
                prod *= uniform();
            }
            total += k;
        }
        return total;
    }

private:
    std::uint64_t key_;
    std::uint64_t hi_;
    std::uint64_t lo_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace w2lab
