#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace brw {

// Raw Philox4x32-10 block function (Salmon et al. constants). Exposed so the
// known-answer vectors can be checked directly.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += W0;
            key[1] += W1;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

// Counter-based generator: key = master seed, counter lanes 2..3 = stream id,
// lanes 0..1 = block index. Replica k runs on stream (seed, k), so replicas are
// independent and individually replayable, and every draw is cross-platform
// bit-reproducible.
class Philox {
  public:
    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          base_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return block_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // 53-bit uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, m); Lemire multiply-shift with rejection.
    std::uint32_t uniform_below(std::uint32_t m) {
        std::uint64_t r = static_cast<std::uint64_t>(next_u32()) * m;
        auto lo = static_cast<std::uint32_t>(r);
        if (lo < m) {
            const std::uint32_t lim = (0u - m) % m;
            while (lo < lim) {
                r = static_cast<std::uint64_t>(next_u32()) * m;
                lo = static_cast<std::uint32_t>(r);
            }
        }
        return static_cast<std::uint32_t>(r >> 32);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  private:
    void refill() {
        block_ = philox4x32_10({static_cast<std::uint32_t>(blk_), static_cast<std::uint32_t>(blk_ >> 32),
                                base_[0], base_[1]},
                               key_);
        ++blk_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> base_;
    std::uint64_t blk_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;
};

} // namespace brw
