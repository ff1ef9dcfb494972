#pragma once

// Deterministic, splittable random streams. Every Monte Carlo routine in the
// library derives its stream from (master seed, stable key), so results are
// reproducible bit-for-bit regardless of evaluation order or worker count.

#include <array>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace hlmax {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// FNV-1a, platform-independent byte hash used to build substream keys.
struct StreamKey {
    std::uint64_t h = 0xcbf29ce484222325ull;

    StreamKey& mix_bytes(const void* data, std::size_t n) {
        const unsigned char* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
        return *this;
    }
    StreamKey& mix(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        return mix_bytes(b, 8);
    }
    StreamKey& mix(double v) {
        if (v == 0.0) v = 0.0;  // collapse -0.0 and +0.0
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        return mix(bits);
    }
    StreamKey& mix(std::string_view s) { return mix_bytes(s.data(), s.size()); }
    StreamKey& mix(int v) { return mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
};

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t key) {
    std::uint64_t s = master ^ (key * 0x9e3779b97f4a7c15ull);
    splitmix64(s);
    std::uint64_t t = splitmix64(s);
    return t ^ master;
}

// xoshiro256++ with splitmix64 seeding. Small, fast, and identical output on
// every platform, unlike the distributions in <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0, 1); never returns an exact endpoint
    double open_uniform() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace hlmax
