// Deterministic, splittable random streams.
//
// xoshiro256++ (Blackman & Vigna), seeded through SplitMix64 from the pair
// (seed, stream_id). Every Monte Carlo sample owns its own stream id, so the
// mapping sample -> random numbers is a pure function of (seed, stream_id)
// and results are bit-identical no matter how samples are distributed over
// threads. Stream independence rests on the usual SplitMix64 argument: the
// 2^64 derived states are pairwise distinct outputs of a bijective mixer, and
// the probability that two of the ~2^20 streams we ever draw overlap within a
// 2^256-period sequence is negligible.
//
// std::uniform_real_distribution and friends are deliberately avoided: their
// output is implementation-defined, which would break byte-identical reports
// across toolchains. All variate transforms are spelled out here or in
// sampling.cpp.

#pragma once

#include <cstdint>

namespace qpt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RngStream {
  public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id) {
        // Mix seed and stream id into four nonzero state words.
        std::uint64_t sm = seed ^ 0x6a09e667f3bcc909ULL;  // offset so seed=0 works
        sm ^= stream_id * 0x2545f4914f6cdd1dULL;
        s_[0] = splitmix64(sm);
        sm ^= stream_id;
        s_[1] = splitmix64(sm);
        s_[2] = splitmix64(sm);
        s_[3] = splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero is the
                                                              // one forbidden state
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on (0,1]: never 0, so log(u) is always finite.
    double u01_pos() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    // Uniform on [0,1).
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

    // Uniform integer in [0, n) by rejection; exact, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

}  // namespace qpt
