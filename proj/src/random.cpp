#include "harris/random.hpp"

#include <cmath>
#include <numbers>

namespace harris {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline PhiloxKey split_key(std::uint64_t k) {
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t make_stream_id(Purpose purpose, std::uint16_t sub, std::uint32_t replicate) noexcept {
    return (static_cast<std::uint64_t>(purpose) << 48) | (static_cast<std::uint64_t>(sub) << 32) |
           static_cast<std::uint64_t>(replicate);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {}

PhiloxCounter RandomStream::counter_at(std::uint64_t block) const noexcept {
    return {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
            static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
}

PhiloxCounter RandomStream::next_block() noexcept {
    return philox4x32_10(counter_at(block_++), split_key(seed_));
}

double words_to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

double RandomStream::uniform() noexcept {
    const auto b = next_block();
    return words_to_unit(b[0], b[1]);
}

namespace {

inline void box_muller(const PhiloxCounter& b, double& z0, double& z1) {
    const double u1 = words_to_unit(b[0], b[1]);
    const double u2 = words_to_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(theta);
    z1 = r * std::sin(theta);
}

}  // namespace

double RandomStream::normal() noexcept {
    double z0, z1;
    box_muller(next_block(), z0, z1);
    return z0;
}

void RandomStream::fill_normals(std::span<double> out) noexcept {
    const std::size_t n = out.size();
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) box_muller(next_block(), out[i], out[i + 1]);
    if (i < n) {
        double spare;
        box_muller(next_block(), out[i], spare);
    }
}

double keyed_uniform(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t k1,
                     std::uint64_t k2) noexcept {
    // The stream identifier is folded into the key so that each stream owns its own keyed domain.
    const auto mixed = philox4x32_10({static_cast<std::uint32_t>(stream_id),
                                      static_cast<std::uint32_t>(stream_id >> 32), 0x6b657965u,
                                      0x64646f6du},
                                     split_key(seed));
    const PhiloxKey key{mixed[0], mixed[1]};
    const auto b = philox4x32_10({static_cast<std::uint32_t>(k1), static_cast<std::uint32_t>(k1 >> 32),
                                  static_cast<std::uint32_t>(k2), static_cast<std::uint32_t>(k2 >> 32)},
                                 key);
    return words_to_unit(b[0], b[1]);
}

}  // namespace harris
