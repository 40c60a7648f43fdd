#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace taskgen {

// Deterministic splitmix64 generator. All randomness in the generator flows
// through this type so that a fixed seed reproduces byte-identical output
// regardless of platform or standard library version.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0.
    uint64_t uniform_u64(uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int lo, int hi) { // inclusive range
        return lo + static_cast<int>(uniform_u64(static_cast<uint64_t>(hi - lo + 1)));
    }

    double uniform_real(double lo = 0.0, double hi = 1.0) {
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    bool chance(double p) { return uniform_real() < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[uniform_u64(v.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_u64(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derive an independent child stream. Children with distinct tags are
    // decorrelated from each other and from the parent.
    Rng derive(uint64_t tag) const {
        Rng child(state_ ^ (tag * 0xff51afd7ed558ccdULL + 0xc4ceb9fe1a85ec53ULL));
        child.next_u64();
        return child;
    }

    Rng derive(std::string_view tag) const {
        uint64_t h = 1469598103934665603ULL; // FNV-1a
        for (char ch : tag) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ULL;
        }
        return derive(h);
    }

private:
    uint64_t state_;
};

} // namespace taskgen
