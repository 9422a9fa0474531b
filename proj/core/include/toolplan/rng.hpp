#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace toolplan {

// splitmix64; used for seed derivation and output-value hashing.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return splitmix64(seed ^ (splitmix64(v) + 0x9e3779b97f4a7c15ULL));
}

constexpr std::uint64_t hash_bytes(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

// Fold an arbitrary tag sequence into one stream seed.
template <class... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Rest... tags) {
    ((seed = hash_combine(seed, static_cast<std::uint64_t>(tags))), ...);
    return seed;
}

// Deterministic RNG with pinned sampling algorithms. std::mt19937_64 output is
// specified by the standard, and the distributions below are implemented by
// hand, so streams are reproducible across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n). n must be positive.
    std::int64_t uniform_int(std::int64_t n) {
        auto v = static_cast<std::int64_t>(uniform() * static_cast<double>(n));
        return v >= n ? n - 1 : v;
    }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates with the pinned uniform_int; std::shuffle is not portable.
    template <class T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i) + 1));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace toolplan
