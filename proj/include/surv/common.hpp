#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace surv {

// Error taxonomy. The CLI maps these onto exit codes: usage errors are
// caught by the argument parser, InvalidInput/SchemaError/ParseError exit
// with 2, NumericError with 3.
struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a pairwise metric has no admissible/acceptable pairs.
struct UndefinedMetric : std::runtime_error {
    explicit UndefinedMetric(const std::string& msg) : std::runtime_error(msg) {}
};

// splitmix64, used to derive independent RNG streams from (seed, salt...)
// without correlated low bits.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    if (b) h = splitmix64(h ^ b);
    if (c) h = splitmix64(h ^ c);
    return h;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                                std::uint64_t c = 0) {
    return std::mt19937_64(mix_seed(seed, a, b, c));
}

// In-place Fisher-Yates. std::shuffle is implementation-defined; this keeps
// shuffles identical across standard libraries so seeded runs stay portable.
template <typename Vec, typename Rng>
void seeded_shuffle(Vec& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace surv
