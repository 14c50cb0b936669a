#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace apa {

/// Deterministic 64-bit generator (SplitMix64). Chosen for portability: the
/// integer stream is identical on every platform, and all floating-point
/// draws are derived from it with explicit arithmetic rather than
/// implementation-defined <random> distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t x = (state_ += 0x9E3779B97F4A7C15ULL);
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    /// Uniform in [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1), both endpoints excluded; safe for inverse-CDF maps.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the paired draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Independent child stream. Streams are tagged so that consumers
    /// (data, init, dropout, ...) cannot collide by draw order.
    Rng derive(std::uint64_t stream_tag) const {
        Rng mixer(state_ ^ (0xD1B54A32D192ED03ULL * (stream_tag + 1)));
        return Rng(mixer.next_u64());
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fixed stream tags used across the library.
namespace stream {
inline constexpr std::uint64_t centers = 1;
inline constexpr std::uint64_t features = 2;
inline constexpr std::uint64_t weight_init = 3;
inline constexpr std::uint64_t activation_init = 4;
inline constexpr std::uint64_t shuffle = 5;
inline constexpr std::uint64_t dropout = 6;
inline constexpr std::uint64_t eval_features = 7;
}  // namespace stream

}  // namespace apa
