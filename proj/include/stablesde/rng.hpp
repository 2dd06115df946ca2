#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace stablesde {

// Philox4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so distinct streams never share state and replay is
// bit-exact regardless of thread scheduling.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
            const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
            const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

// One logical random stream, identified by (master_seed, stream_id).
// The substream counter advances by one per generated 128-bit block.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : key_{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32)},
          stream_lo_(std::uint32_t(stream_id)),
          stream_hi_(std::uint32_t(stream_id >> 32)) {}

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const auto out = Philox4x32::block(
            {std::uint32_t(counter_), std::uint32_t(counter_ >> 32), stream_lo_, stream_hi_},
            key_);
        ++counter_;
        spare_ = (std::uint64_t(out[2]) << 32) | out[3];
        have_spare_ = true;
        return (std::uint64_t(out[0]) << 32) | out[1];
    }

    // Uniform on (0,1), safe for log().
    double next_double() {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_exponential() { return -std::log(next_double()); }

    double next_gaussian() {
        const double u1 = next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    std::uint64_t counter() const { return counter_; }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_, stream_hi_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace stablesde
