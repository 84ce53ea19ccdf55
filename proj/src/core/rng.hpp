#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "matrix.hpp"

namespace aka {

// Deterministic RNG with explicit sub-stream derivation. Distribution mapping
// is implemented here (not via <random> distributions) so that sequences are
// identical across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    // splitmix64 step
    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n);

    // standard normal, Box-Muller
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    Matrix normal_matrix(int rows, int cols, double stddev, double mean = 0.0);

    // Fisher-Yates shuffle over indices [0, n)
    std::vector<int> permutation(int n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Derives an independent child seed from a parent seed and a label, so that
// e.g. data sampling and parameter init never share a stream.
uint64_t derive_seed(uint64_t seed, std::string_view label, uint64_t index = 0);

}  // namespace aka
