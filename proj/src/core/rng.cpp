#include "rng.hpp"

#include <cmath>
#include <numbers>

namespace aka {

uint64_t Rng::uniform_int(uint64_t n) {
    if (n == 0) return 0;
    // rejection sampling to avoid modulo bias
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Matrix Rng::normal_matrix(int rows, int cols, double stddev, double mean) {
    Matrix m(rows, cols);
    for (double& v : m.raw()) v = mean + stddev * normal();
    return m;
}

std::vector<int> Rng::permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
}

uint64_t derive_seed(uint64_t seed, std::string_view label, uint64_t index) {
    // FNV-1a over the label, folded with the seed and index through splitmix
    uint64_t h = 1469598103934665603ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    Rng mix(seed ^ h ^ (index * 0xd6e8feb86659fd93ULL + 1));
    return mix.next_u64();
}

}  // namespace aka
