#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace posthoc {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// A block is a pure function of (counter, key), so any trial index can be
// mapped to its own stream without generating the ones before it.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t prod0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t prod1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(prod0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(prod0);
            const auto hi1 = static_cast<std::uint32_t>(prod1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(prod1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

// One trial's substream: counter = (trial index, block index), key = seed.
// Identical (seed, trial_index) always replays the same draws, which is what
// makes the simulation reproducible under any worker count.
class TrialStream {
public:
    TrialStream(std::uint64_t seed, std::uint64_t trial_index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trial_(trial_index) {}

    std::uint64_t next_u64() {
        if (word_ >= 4) {
            refill();
        }
        const std::uint64_t lo = buf_[word_];
        const std::uint64_t hi = buf_[word_ + 1];
        word_ += 2;
        return lo | (hi << 32);
    }

    // Uniform on (0,1], never exactly 0.
    double uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cosine branch).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    void refill() {
        buf_ = Philox4x32::block({static_cast<std::uint32_t>(trial_),
                                  static_cast<std::uint32_t>(trial_ >> 32),
                                  static_cast<std::uint32_t>(block_),
                                  static_cast<std::uint32_t>(block_ >> 32)},
                                 key_);
        ++block_;
        word_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t trial_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int word_ = 4;
};

}  // namespace posthoc
