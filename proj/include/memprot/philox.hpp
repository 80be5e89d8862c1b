#pragma once

#include <array>
#include <cstdint>

namespace memprot {

// Philox 4x64, 10 rounds. Counter-based: the generator is a pure function of
// (key, counter), so parallel workers and replayed runs read identical values
// by addressing draws with semantic counters (trial index, request id) instead
// of sharing mutable state. Round constants are the published ones; the unit
// tests pin output blocks against an independent reference implementation.
class philox4x64 {
  public:
    using block = std::array<uint64_t, 4>;

    philox4x64(uint64_t key0, uint64_t key1) : key_{key0, key1} {}

    block operator()(block ctr) const {
        uint64_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            ctr = round_fn(ctr, k0, k1);
            k0 += weyl0;
            k1 += weyl1;
        }
        return ctr;
    }

  private:
    static constexpr uint64_t mul0 = 0xD2E7470EE14C6C93ull;
    static constexpr uint64_t mul1 = 0xCA5A826395121157ull;
    static constexpr uint64_t weyl0 = 0x9E3779B97F4A7C15ull;
    static constexpr uint64_t weyl1 = 0xBB67AE8584CAA73Bull;

    static uint64_t mulhi(uint64_t a, uint64_t b) {
        return uint64_t((unsigned __int128)(a) * b >> 64);
    }

    static block round_fn(block x, uint64_t k0, uint64_t k1) {
        uint64_t lo0 = mul0 * x[0];
        uint64_t hi0 = mulhi(mul0, x[0]);
        uint64_t lo1 = mul1 * x[2];
        uint64_t hi1 = mulhi(mul1, x[2]);
        return {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
    }

    std::array<uint64_t, 2> key_;
};

// Top 53 bits to a uniform in [0, 1).
inline double u64_to_unit(uint64_t x) { return double(x >> 11) * 0x1.0p-53; }

}  // namespace memprot
