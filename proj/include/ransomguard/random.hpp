#pragma once

#include <cmath>
#include <cstdint>

namespace ransomguard {

// splitmix64 finalizer. Published mixing function: sub-stream i of seed s is
// seeded with mix64(s ^ (0x9E3779B97F4A7C15 * (i + 1))).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic stream generator. The standard library distributions are not
// bit-reproducible across implementations, so all draws are derived here.
class random_source {
  public:
    explicit random_source(std::uint64_t seed) : state_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), rejection sampled to avoid modulo bias
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
        std::uint64_t x = next_u64();
        while (x > limit) x = next_u64();
        return x % n;
    }

    // Marsaglia polar method with one cached deviate
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // weighted index draw; weights need not be normalized
    std::size_t weighted_index(const double* w, std::size_t n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += w[i];
        double r = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            acc += w[i];
            if (r < acc) return i;
        }
        return n - 1;
    }

    random_source substream(std::uint64_t index) const {
        return random_source(mix64(seed_ ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
    }

    template <typename T>
    void shuffle(T* data, std::size_t n) {
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            T tmp = data[i - 1];
            data[i - 1] = data[j];
            data[j] = tmp;
        }
    }

  private:
    std::uint64_t state_;
    std::uint64_t seed_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ransomguard
