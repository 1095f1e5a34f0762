#pragma once

#include <cstdint>
#include <initializer_list>

namespace ppolar {

// splitmix64: tiny counter-style generator.  Experiments need streams that
// are (a) reproducible byte-for-byte across platforms -- std::uniform_int_
// distribution is not -- and (b) splittable per sample so parallel schedules
// cannot change the draws.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // unbiased uniform draw from [0, n) by rejection
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    // uniform in [lo, hi] inclusive
    long range(long lo, long hi) {
        return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
};

// Derive an independent substream from a seed and a key path, e.g.
// derive_stream(seed, {sample, attempt, row, col}).  Feeding each key through
// the splitmix scrambler keeps distinct paths decorrelated.
inline SplitMix64 derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    SplitMix64 s(seed);
    std::uint64_t acc = s.next();
    for (std::uint64_t k : keys) {
        SplitMix64 t(acc ^ (k + 0x9e3779b97f4a7c15ULL));
        acc = t.next();
    }
    return SplitMix64(acc);
}

}  // namespace ppolar
