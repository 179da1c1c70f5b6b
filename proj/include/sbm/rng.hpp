#pragma once

#include <cstdint>

namespace sbm {

// Finalizer from the splitmix64 generator; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based generator: a keyed hash of (seed, stream, counter).
// Substreams are independent by construction, so work keyed by
// (stream, counter) can be distributed across threads and still produce
// the same draws as a serial run.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix64(seed ^ mix64(stream ^ 0x5851F42D4C957F2DULL))) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return mix64(key_ ^ mix64(counter + 0x2545F4914F6CDD1DULL));
    }

    // Uniform double in [0, 1) with 53 random mantissa bits.
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound) by rejection-free scaling; bias is
    // negligible for bound << 2^64 and irrelevant for test generators.
    std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const {
        return static_cast<std::uint64_t>(uniform(counter) * static_cast<double>(bound));
    }

private:
    std::uint64_t key_;
};

// Stateful convenience wrapper for sequential draws (test data generators).
class SequentialRng {
public:
    explicit SequentialRng(std::uint64_t seed, std::uint64_t stream = 0)
        : prf_(seed, stream) {}

    double uniform() { return prf_.uniform(counter_++); }
    std::uint64_t bits() { return prf_.bits(counter_++); }
    std::uint64_t below(std::uint64_t bound) { return prf_.below(counter_++, bound); }
    int range(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    CounterRng prf_;
    std::uint64_t counter_ = 0;
};

}  // namespace sbm
