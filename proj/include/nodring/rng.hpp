#pragma once

#include <cstdint>
#include <random>

namespace nodring {

// Stream derivation from one master seed (splitmix64 finalizer). Distinct tags
// give independent substreams; used so NOD and logit runs never share draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 with explicit bit-to-double conversion. The standard pins the
// engine's output sequence, so draws are identical across platforms; the
// distributions in <random> are not pinned, hence the hand-rolled mapping.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    int uniform_int(int n) {
        const int k = static_cast<int>(uniform() * n);
        return k < n ? k : n - 1;
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace nodring
