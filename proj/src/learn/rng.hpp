#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

namespace bugmine::learn {

/// splitmix64 finalizer chained over the parts; stable across platforms.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0)
{
    std::uint64_t h = seed;
    for (auto v : {a, b, c}) {
        h += 0x9e3779b97f4a7c15ULL + v;
        h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
        h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
        h ^= h >> 31;
    }
    return h;
}

/// mt19937_64 with draws defined here rather than by the standard library's
/// distributions, so results do not depend on the library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool coin() { return (engine_() >> 63) != 0; }

    /// Moves a uniformly chosen k-subset to the front (Fisher-Yates prefix).
    template <class T>
    void partial_shuffle(std::vector<T>& v, std::size_t k)
    {
        for (std::size_t i = 0; i < k && i + 1 < v.size(); ++i)
            std::swap(v[i], v[i + below(v.size() - i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bugmine::learn
