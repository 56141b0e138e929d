#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rps {

// Counter-based 64-bit generator.
//
// Output i of a stream with key k is finalize(k + i * PHI64) where finalize is
// the SplitMix64 finalizer (two xor-shift/multiply rounds).  Because the state
// is just (key, counter), any output is addressable in O(1) and independent
// streams are cheap to derive.
//
// Jump function for per-chain streams: stream(j) re-keys the generator with
//   key' = finalize(key ^ finalize(j * PHI64 + MIX64))
// so chains j = 0, 1, ... of a run seeded with `seed` draw from disjoint,
// reproducible sequences regardless of scheduling.  This is the documented
// stream-derivation rule relied on by the experiment harness.
//
// normal() produces Box-Muller pairs (always consuming exactly two uniforms
// per pair) and caches the spare, keeping stream consumption deterministic.
class CounterRng {
public:
    static constexpr std::uint64_t kPhi64 = 0x9e3779b97f4a7c15ULL;
    static constexpr std::uint64_t kStreamMix = 0xd1b54a32d192ed03ULL;

    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    explicit CounterRng(std::uint64_t seed) : key_(finalize(seed ^ kPhi64)) {}

    // Derived generator for stream `stream_id`; see the jump rule above.
    CounterRng stream(std::uint64_t stream_id) const {
        CounterRng out(0);
        out.key_ = finalize(key_ ^ finalize(stream_id * kPhi64 + kStreamMix));
        out.counter_ = 0;
        out.has_spare_ = false;
        return out;
    }

    std::uint64_t next_u64() {
        return finalize(key_ + (counter_++) * kPhi64);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe to take logs of.
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller; pairs share two uniforms.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 uses the
    // standard boost G(a) = G(a+1) * U^{1/a}.
    double gamma(double shape) {
        if (!(shape > 0.0))
            throw std::invalid_argument("CounterRng::gamma: shape must be positive");
        if (shape < 1.0) {
            const double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0)
                continue;
            v = v * v * v;
            const double u = uniform_pos();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

    // Beta(a, b) from two gammas.
    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rps
