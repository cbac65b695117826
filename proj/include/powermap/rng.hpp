#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace powermap {

// Splittable counter-based random stream. A stream is identified by a
// 64-bit master seed plus a path of 64-bit indices; deriving a child
// stream mixes the index into the key, so (seed, point, sim) names a
// stream without any shared state. Draws advance a SplitMix64-style
// counter, so streams are cheap value types.
class RngStream {
public:
    explicit RngStream(std::uint64_t master_seed)
        : master_seed_(master_seed), key_(mix64(master_seed + kGolden)) {}

    RngStream(std::uint64_t master_seed, const std::vector<std::uint64_t>& path)
        : RngStream(master_seed) {
        for (std::uint64_t idx : path) *this = child(idx);
    }

    // Derived substream for index `idx`; independent of the parent stream.
    [[nodiscard]] RngStream child(std::uint64_t idx) const {
        RngStream s(*this);
        s.key_ = mix64(key_ ^ mix64(idx + kGolden));
        s.counter_ = 0;
        s.has_spare_ = false;
        s.path_.push_back(idx);
        return s;
    }

    std::uint64_t master_seed() const { return master_seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    std::uint64_t next_u64() {
        counter_ += kGolden;
        return mix64(key_ ^ counter_);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_uniform();
    }

    // Marsaglia polar method; the spare deviate is cached in the stream.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_uniform() - 1.0;
            v = 2.0 * next_uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    std::uint64_t next_index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_index: n must be positive");
        return static_cast<std::uint64_t>(next_uniform() * static_cast<double>(n)) % n;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    // Finalizer from SplitMix64 (Stafford mix 13).
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t master_seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::vector<std::uint64_t> path_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace powermap
