#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace projcx {

/// Deterministic splitmix64 generator.  Used for every sampled mode so that a
/// seed fully determines the sample, independent of platform or library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform value in [0, bound).
    std::uint64_t below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("Rng::below: zero bound");
        // rejection sampling keeps the draw unbiased
        std::uint64_t limit = ~0ULL - (~0ULL % bound);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % bound;
    }

    /// Uniform value in [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("Rng::range: empty range");
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    template <class T>
    const T& pick(const std::vector<T>& v) {
        if (v.empty()) throw std::invalid_argument("Rng::pick: empty vector");
        return v[static_cast<std::size_t>(below(v.size()))];
    }

private:
    std::uint64_t state_;
};

}  // namespace projcx
