#pragma once

// Counter-based random numbers: every draw is a pure function of its key, so
// results do not depend on thread scheduling or on the order of evaluation.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kolmo {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

/// Uniform on the open interval (0,1).
inline double to_unit(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals from one key (Box-Muller).
inline void normal_pair(std::uint64_t key, double& z0, double& z1) {
    const double u1 = to_unit(mix64(key));
    const double u2 = to_unit(mix64(key ^ 0xd1b54a32d192ed03ULL));
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    z0 = rad * std::cos(ang);
    z1 = rad * std::sin(ang);
}

/// Sequential stream over hash_key(seed, stream, counter).
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() { return hash_key(seed_, stream_, counter_++); }
    double uniform() { return to_unit(next_u64()); }
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double z0 = 0.0;
        normal_pair(next_u64(), z0, spare_);
        have_spare_ = true;
        return z0;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace kolmo
