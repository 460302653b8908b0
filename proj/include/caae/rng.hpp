#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace caae {

// splitmix64; used to derive independent seeds and renderer attributes.
inline std::uint64_t hash64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return hash64(root ^ hash64(stream));
}

// Uniform in [0, 1) from a single hashed word; stable across platforms.
inline double hash_unit(std::uint64_t x) {
    return static_cast<double>(hash64(x) >> 11) * (1.0 / 9007199254740992.0);
}

using Rng = std::mt19937_64;

// i.i.d. uniform on [-1, 1], n rows of dim entries.
template <class T>
std::vector<std::vector<T>> sample_prior(int n, int dim, Rng& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<T>> out(n);
    for (auto& row : out) {
        row.resize(dim);
        for (auto& v : row) v = static_cast<T>(u(rng));
    }
    return out;
}

}  // namespace caae
