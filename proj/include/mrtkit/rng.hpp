#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace mrtkit {

// Philox4x32-10 counter-based generator.
//
// Streams are addressed by (seed, path, substream): the key carries the
// seed, counter words 2-3 carry the stream address, words 0-1 the draw
// index within the stream. A given cell of a given stream produces the
// same value no matter which thread asks for it or in which order the
// other streams are consumed, so per-path parallel generation is
// bit-identical to sequential generation.
class PhiloxRng {
public:
    PhiloxRng(std::uint64_t seed, std::uint32_t path, std::uint32_t substream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, 0u, substream, path} {}

    std::uint32_t next_u32() {
        if (avail_ == 0) refill();
        return buf_[--avail_];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform on (0,1), 53-bit resolution, never returns an endpoint
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; the spare is cached per stream
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Exp(rate); rate == 0 yields +infinity (no arrival)
    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(uniform()) / rate;
    }

private:
    void refill() {
        std::array<std::uint32_t, 4> x = ctr_;
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ull * x[0];
            const std::uint64_t p1 = 0xCD9E8D57ull * x[2];
            x = {static_cast<std::uint32_t>(p1 >> 32) ^ x[1] ^ k0,
                 static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ x[3] ^ k1,
                 static_cast<std::uint32_t>(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_ = x;
        avail_ = 4;
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int avail_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mrtkit
