#pragma once

#include <array>
#include <cstdint>

namespace htwk {

/// Philox4x64-10 block function (Salmon et al., Random123).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Counter-based random stream. The key is (seed, stream index); the block
/// counter advances by one per four 64-bit outputs, so a (seed, index) pair
/// always reproduces the same sequence and distinct indices give
/// independent streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() {
        if (pos_ == 4) {
            block_ = philox4x64({counter_++, 0, 0, 0}, {seed_, stream_});
            pos_ = 0;
        }
        return block_[pos_++];
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return to_open_unit(next_u64()); }

    /// Top 52 bits, centred in their cell: 2^-53 <= u <= 1 - 2^-53.
    static double to_open_unit(std::uint64_t word) {
        return (static_cast<double>(word >> 12) + 0.5) * 0x1.0p-52;
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 4> block_{};
    int pos_ = 4;
};

}  // namespace htwk
