#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vatd {

// Every consumer of randomness owns a named substream derived from one root
// seed. Changing how one component draws cannot shift any other component's
// sequence, which keeps paired experiment runs paired.
uint64_t derive_seed(uint64_t root, std::string_view stream);
uint64_t derive_seed(uint64_t root, std::string_view stream, uint64_t index);

std::mt19937_64 make_rng(uint64_t root, std::string_view stream);
std::mt19937_64 make_rng(uint64_t root, std::string_view stream, uint64_t index);

// Uniform draws that do not depend on std::*_distribution internals, so the
// same seed produces the same stream on any platform.
double uniform_double(std::mt19937_64& rng);               // [0, 1)
uint64_t uniform_below(std::mt19937_64& rng, uint64_t n);  // [0, n), n >= 1
int uniform_int(std::mt19937_64& rng, int lo, int hi);     // [lo, hi] inclusive

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace vatd
