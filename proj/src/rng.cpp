#include "vatd/rng.hpp"

namespace vatd {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

uint64_t derive_seed(uint64_t root, std::string_view stream) {
    return splitmix64(splitmix64(root ^ fnv1a(stream)));
}

uint64_t derive_seed(uint64_t root, std::string_view stream, uint64_t index) {
    return splitmix64(derive_seed(root, stream) ^ splitmix64(index));
}

std::mt19937_64 make_rng(uint64_t root, std::string_view stream) {
    return std::mt19937_64(derive_seed(root, stream));
}

std::mt19937_64 make_rng(uint64_t root, std::string_view stream, uint64_t index) {
    return std::mt19937_64(derive_seed(root, stream, index));
}

double uniform_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
    // rejection sampling: no modulo bias
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(uniform_below(rng, static_cast<uint64_t>(hi - lo) + 1));
}

}  // namespace vatd
