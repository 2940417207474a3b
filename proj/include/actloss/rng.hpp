#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace actloss {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t v) noexcept
{
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

/// Derive a child seed from a master seed and a path of indices. Used to
/// give every (experiment, ratio, trial) its own stream, so that adding
/// trials never perturbs earlier ones.
template <typename... Ix>
constexpr std::uint64_t derive_seed(std::uint64_t master, Ix... path) noexcept
{
    std::uint64_t s = mix64(master);
    ((s = mix64(s ^ mix64(static_cast<std::uint64_t>(path) + 0x632be59bd9b4e019ULL))), ...);
    return s;
}

struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

/// Counter-based generator: the i-th draw of stream (seed, stream_id) is a
/// pure function of (seed, stream_id, i). Gaussians come from Box-Muller.
class CounterRng {
public:
    explicit CounterRng(RngSpec spec) noexcept
        : key_(mix64(spec.seed ^ mix64(spec.stream_id ^ 0xd1b54a32d192ed03ULL)))
    {}
    CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept
        : CounterRng(RngSpec{seed, stream_id}) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double gaussian() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_open0()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace actloss
