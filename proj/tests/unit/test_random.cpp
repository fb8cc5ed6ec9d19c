#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <set>
#include <vector>

#include "harris/random.hpp"
#include "harris/stats.hpp"

using namespace harris;

TEST_CASE("philox4x32_10 known answers") {
    const PhiloxCounter zero = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(zero == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

    const PhiloxCounter ones =
        philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});

    const PhiloxCounter pi = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                           {0xa4093822u, 0x299f31d0u});
    CHECK(pi == PhiloxCounter{0xd16cfe09u, 0x94fdcceb, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("stream ids are injective in their fields") {
    std::set<std::uint64_t> ids;
    for (auto p : {Purpose::increments, Purpose::regularizer, Purpose::crossing, Purpose::reference})
        for (std::uint16_t sub : {0, 1, 65535})
            for (std::uint32_t rep : {0u, 1u, 4294967295u}) ids.insert(make_stream_id(p, sub, rep));
    CHECK(ids.size() == 4u * 3u * 3u);
    CHECK(make_stream_id(Purpose::increments, 2, 7) == ((std::uint64_t{1} << 48) | (std::uint64_t{2} << 32) | 7u));
}

TEST_CASE("streams are reproducible and seekable") {
    RandomStream a(42, make_stream_id(Purpose::increments, 0, 3));
    std::vector<double> first;
    for (int i = 0; i < 10; ++i) first.push_back(a.normal());
    CHECK(a.position() == 10);

    RandomStream b(42, make_stream_id(Purpose::increments, 0, 3));
    for (int i = 0; i < 10; ++i) CHECK(b.normal() == first[static_cast<std::size_t>(i)]);

    b.seek(4);
    CHECK(b.normal() == first[4]);

    RandomStream c(42, make_stream_id(Purpose::increments, 0, 4));
    CHECK(c.normal() != first[0]);
}

TEST_CASE("uniforms stay inside the open unit interval") {
    CHECK(words_to_unit(0, 0) > 0.0);
    CHECK(words_to_unit(0xffffffffu, 0xffffffffu) < 1.0);
    RandomStream s(1, 0);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal moments") {
    RandomStream s(7, make_stream_id(Purpose::auxiliary, 0, 0));
    std::vector<double> x(200000), x2(x.size()), x4(x.size());
    s.fill_normals(x);
    CHECK(s.position() == x.size() / 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x2[i] = x[i] * x[i];
        x4[i] = x2[i] * x2[i];
    }
    const Estimate m = mean_se(x), v = mean_se(x2), k = mean_se(x4);
    CHECK(std::abs(m.mean) < 4.0 * m.se);
    CHECK(std::abs(v.mean - 1.0) < 4.0 * v.se);
    CHECK(std::abs(k.mean - 3.0) < 4.0 * k.se);
}

TEST_CASE("keyed uniforms depend only on their key") {
    const double u = keyed_uniform(9, 3, 11, 12);
    CHECK(u == keyed_uniform(9, 3, 11, 12));
    CHECK(u != keyed_uniform(9, 3, 11, 13));
    CHECK(u != keyed_uniform(9, 4, 11, 12));
    CHECK(u != keyed_uniform(10, 3, 11, 12));
}
