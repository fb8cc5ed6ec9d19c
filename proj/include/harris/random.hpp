/// @file random.hpp
/// @brief Counter-based random streams (Philox4x32-10) with structural stream separation.
#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace harris {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// The Philox4x32 bijection with ten rounds.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Tags that keep independent consumers of randomness in separate counter ranges.
enum class Purpose : std::uint16_t {
    increments = 1,
    regularizer = 2,
    crossing = 3,
    bootstrap = 4,
    reference = 5,
    auxiliary = 6,
};

/// Packs (purpose, sub, replicate) into a 64-bit stream identifier.
///
/// The layout is purpose in bits 48..63, sub in bits 32..47 and replicate in bits 0..31,
/// so the map is injective and distinct identifiers never share a counter block.
std::uint64_t make_stream_id(Purpose purpose, std::uint16_t sub, std::uint32_t replicate) noexcept;

/// A sequential view over the Philox counter space for one (seed, stream) pair.
///
/// The counter of block b is {b_lo, b_hi, id_lo, id_hi} under key = seed, hence
/// streams with different identifiers are disjoint by construction. The stream keeps
/// no cached variates: its complete state is the block position.
class RandomStream {
public:
    RandomStream() = default;
    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Number of blocks consumed so far.
    std::uint64_t position() const noexcept { return block_; }
    void seek(std::uint64_t block) noexcept { block_ = block; }

    /// Counter that the next call to next_block() will encrypt.
    PhiloxCounter counter_at(std::uint64_t block) const noexcept;

    PhiloxCounter next_block() noexcept;

    /// Uniform on the open interval (0,1) with 52 random bits; consumes one block.
    double uniform() noexcept;

    /// Standard normal variate; consumes one block.
    double normal() noexcept;

    /// Fills `out` with standard normals, consuming ceil(n/2) blocks.
    void fill_normals(std::span<double> out) noexcept;

    /// Same seed, different stream.
    RandomStream derive(Purpose purpose, std::uint16_t sub, std::uint32_t replicate) const noexcept {
        return RandomStream(seed_, make_stream_id(purpose, sub, replicate));
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t block_ = 0;
};

/// Uniform on (0,1) addressed by a key tuple instead of a position.
///
/// Used where the draw must be reproducible independently of how many draws
/// preceded it, e.g. to share a decision between two coupled processes.
double keyed_uniform(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t k1,
                     std::uint64_t k2) noexcept;

/// Maps two 32-bit words to a uniform on (0,1) using their top 52 bits.
double words_to_unit(std::uint32_t hi, std::uint32_t lo) noexcept;

}  // namespace harris
