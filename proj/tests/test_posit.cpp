#include <doctest.h>

#include <cmath>
#include <limits>

#include "posittrain/posit.hpp"
#include "posittrain/rng.hpp"
#include "support.hpp"

using namespace posittrain;
using testing::Rational;

TEST_SUITE("posit") {

TEST_CASE("decode of the two special patterns") {
    const PositConfig cfg(16, 1);
    CHECK(decode(PositBits{0x0000, cfg}).kind == ValueKind::Zero);
    CHECK(decode(PositBits{0x8000, cfg}).kind == ValueKind::NaR);
}

TEST_CASE("decode posit8 unity and one half") {
    const PositConfig cfg(8, 0);
    const auto one = decode(PositBits{0b01000000, cfg});
    CHECK(one.kind == ValueKind::Finite);
    CHECK_FALSE(one.negative);
    CHECK(one.regime == 0);
    CHECK(one.exponent == 0);
    CHECK(one.fraction == 0);
    CHECK(to_f64(PositBits{0b01000000, cfg}) == 1.0);

    const auto half = decode(PositBits{0b00100000, cfg});
    CHECK(half.regime == -1);
    CHECK(to_f64(PositBits{0b00100000, cfg}) == 0.5);
    CHECK(oracle::posit_value(0b00100000, 8, 0) == Rational(1, 2));
}

TEST_CASE("decode reads negative patterns through two's complement") {
    const PositConfig cfg(8, 0);
    const auto d = decode(PositBits{0xC0, cfg});
    CHECK(d.negative);
    CHECK(d.regime == 0);
    CHECK(to_f64(PositBits{0xC0, cfg}) == -1.0);
}

TEST_CASE("to_exact") {
    const PositConfig es1(16, 1);
    DecodedPosit unity;
    unity.kind = ValueKind::Finite;
    const auto u = to_exact(unity, es1);
    CHECK(u.is_finite());
    CHECK_FALSE(u.sticky);
    CHECK(testing::rational(u) == Rational(1));

    DecodedPosit eight;
    eight.kind = ValueKind::Finite;
    eight.regime = 1;
    eight.exponent = 1;
    eight.fraction_bits = 12;
    const auto e = to_exact(eight, es1);
    CHECK(e.exponent == 3);
    CHECK(testing::rational(e) == Rational(8));

    DecodedPosit nar;
    nar.kind = ValueKind::NaR;
    CHECK(to_exact(nar, es1).is_nar());
}

TEST_CASE("encode_round examples") {
    CHECK(encode_round(exact_from_double(1.0), PositConfig(16, 1)).bits == 0x4000);

    BigUint big = 1;
    big <<= 200;
    CHECK(encode_round(ExactReal::from_scaled(false, big, 0), PositConfig(8, 0)).bits == 0x7F);

    // 1.7 against a brute-force nearest-value search over all posit8 (es=0).
    const PositConfig cfg(8, 0);
    const Rational target(17, 10);
    std::uint32_t best = 0;
    Rational best_err = -1;
    for (std::uint32_t p = 0; p < 256; ++p) {
        const auto v = oracle::posit_value(p, 8, 0);
        if (!v) continue;
        const Rational err = abs(*v - target);
        if (best_err < 0 || err < best_err || (err == best_err && p % 2 == 0)) {
            best = p;
            best_err = err;
        }
    }
    const auto x = exact_div(ExactReal::from_scaled(false, 17, 0), ExactReal::from_scaled(false, 10, 0), 64);
    CHECK(encode_round(x, cfg).bits == best);
    CHECK(best == 0x56);  // 1.6875
}

TEST_CASE("from_f64 and to_f64") {
    const PositConfig cfg(16, 1);
    CHECK(from_f64(0.0, cfg).bits == 0);
    CHECK(from_f64(-0.0, cfg).bits == 0);
    CHECK(from_f64(1e30, cfg).bits == 0x7FFF);
    CHECK(to_f64(PositBits{0x7FFF, cfg}) == std::ldexp(1.0, 28));
    CHECK(from_f64(-1e30, cfg).bits == 0x8001);
    CHECK(from_f64(1e-300, cfg).bits == 0x0001);
    CHECK(from_f64(std::numeric_limits<double>::quiet_NaN(), cfg).is_nar());
    CHECK(from_f64(std::numeric_limits<double>::infinity(), cfg).is_nar());
    for (std::uint32_t p = 0; p < 0x10000; ++p) {
        if (p == 0x8000) continue;
        const PositBits bits{p, cfg};
        REQUIRE(from_f64(to_f64(bits), cfg) == bits);
    }
}

TEST_CASE("exact cancellation and identity") {
    const PositConfig cfg16(16, 1);
    const auto one = from_f64(1.0, cfg16);
    CHECK(add(one, neg(one)).bits == 0);
    CHECK(reference::add(one, neg(one)).bits == 0);
    for (int es = 0; es <= 2; ++es) {
        const PositConfig cfg(8, es);
        const auto unity = from_f64(1.0, cfg);
        for (std::uint32_t p = 0; p < 256; ++p) {
            if (p == 0x80) continue;
            CHECK(mul(PositBits{p, cfg}, unity).bits == p);
        }
    }
}

TEST_CASE("negation fixed points and symmetry") {
    CHECK(neg(PositBits{0x0000, PositConfig(16, 1)}).bits == 0x0000);
    CHECK(neg(PositBits{0x8000, PositConfig(16, 1)}).bits == 0x8000);
    for (int es = 0; es <= 2; ++es) {
        const PositConfig cfg(8, es);
        for (std::uint32_t p = 0; p < 256; ++p) {
            const auto v = oracle::posit_value(p, 8, es);
            const auto nv = oracle::posit_value(neg(PositBits{p, cfg}).bits, 8, es);
            if (!v) {
                CHECK_FALSE(nv);
                continue;
            }
            CHECK(*nv == -*v);
        }
    }
}

TEST_CASE("compare matches signed-integer and value order") {
    for (int es = 0; es <= 2; ++es) {
        const PositConfig cfg(8, es);
        for (std::uint32_t a = 0; a < 256; ++a) {
            if (a == 0x80) continue;
            const auto va = *oracle::posit_value(a, 8, es);
            for (std::uint32_t b = 0; b < 256; ++b) {
                if (b == 0x80) continue;
                const auto vb = *oracle::posit_value(b, 8, es);
                const auto by_int = static_cast<std::int8_t>(a) <=> static_cast<std::int8_t>(b);
                const auto got = compare(PositBits{a, cfg}, PositBits{b, cfg});
                REQUIRE(got == by_int);
                REQUIRE((va < vb) == (got < 0));
            }
        }
        CHECK_THROWS_AS(compare(PositBits::nar(cfg), PositBits::zero(cfg)), std::domain_error);
    }
}

TEST_CASE("roundtrip is exhaustive for posit8") {
    for (int es = 0; es <= 2; ++es) {
        const PositConfig cfg(8, es);
        for (std::uint32_t p = 0; p < 256; ++p) CHECK(encode_round(to_exact(PositBits{p, cfg}), cfg).bits == p);
    }
}

TEST_CASE("finite nonzero inputs never round to zero or NaR") {
    const auto rng = CounterRng::derive(1, Stream::Test, 100);
    std::uint64_t c = 0;
    for (int n : {2, 3, 5, 8, 12, 16, 24, 32}) {
        for (int es = 0; es <= 4; ++es) {
            const PositConfig cfg(n, es);
            for (int i = 0; i < 400; ++i) {
                const BigUint mag = (rng.at(c++) >> 1) | 1u;
                const auto lsb = static_cast<std::int64_t>(rng.below(c++, 1200)) - 600;
                const bool negative = (rng.at(c++) & 1u) != 0;
                const auto x = ExactReal::from_scaled(negative, mag, lsb, (rng.at(c++) & 1u) != 0);
                const auto p = encode_round(x, cfg);
                REQUIRE_FALSE(p.is_zero());
                REQUIRE_FALSE(p.is_nar());
            }
        }
    }
}

TEST_CASE("NaR absorbs and division by zero gives NaR") {
    for (const PositConfig cfg : {PositConfig(8, 0), PositConfig(16, 1), PositConfig(32, 2)}) {
        const auto nar = PositBits::nar(cfg);
        const auto x = from_f64(3.25, cfg);
        for (const auto& r : {add(nar, x), sub(x, nar), mul(nar, x), div(x, nar), reference::add(nar, x),
                              reference::mul(x, nar), reference::div(nar, x)})
            CHECK(r.is_nar());
        CHECK(div(x, PositBits::zero(cfg)).is_nar());
        CHECK(reference::div(x, PositBits::zero(cfg)).is_nar());
        CHECK(div(PositBits::zero(cfg), x).is_zero());
    }
}

TEST_CASE("mismatched configurations are rejected") {
    CHECK_THROWS_AS(add(PositBits{0x40, PositConfig(8, 0)}, PositBits{0x4000, PositConfig(16, 1)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(PositConfig(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(PositConfig(33, 0), std::invalid_argument);
    CHECK_THROWS_AS(PositConfig(16, 5), std::invalid_argument);
}

TEST_CASE("fast kernels agree with the exact reference route") {
    const auto rng = CounterRng::derive(2, Stream::Test, 0);
    std::uint64_t c = 0;
    for (int n : {6, 10, 16, 20, 27, 32}) {
        for (int es = 0; es <= 4; ++es) {
            const PositConfig cfg(n, es);
            for (int i = 0; i < 3000; ++i) {
                const auto a = PositBits::make(static_cast<std::uint32_t>(rng.at(c++)), cfg);
                const auto b = PositBits::make(static_cast<std::uint32_t>(rng.at(c++)), cfg);
                REQUIRE(add(a, b) == reference::add(a, b));
                REQUIRE(sub(a, b) == reference::sub(a, b));
                REQUIRE(mul(a, b) == reference::mul(a, b));
                REQUIRE(div(a, b) == reference::div(a, b));
            }
        }
    }
}

TEST_CASE("random posit16 sums and products match the binary64 oracle") {
    const PositConfig cfg(16, 1);
    const oracle::PositRounder rounder(16, 1);
    const auto rng = CounterRng::derive(3, Stream::Test, 0);
    std::uint64_t failures = 0;
    for (std::uint64_t i = 0; i < 350'000; ++i) {
        const auto r = rng.at(i);
        const PositBits a = PositBits::make(static_cast<std::uint32_t>(r), cfg);
        const PositBits b = PositBits::make(static_cast<std::uint32_t>(r >> 16), cfg);
        if (a.is_nar() || b.is_nar()) continue;
        const double x = to_f64(a);
        const double y = to_f64(b);
        const double s = x + y;
        const double d = x - y;
        const double p = x * y;
        // Exactness precondition: TwoSum and FMA residuals vanish.
        const double bs = s - x;
        REQUIRE(((x - (s - bs)) + (y - bs)) == 0.0);
        const double bd = d - x;
        REQUIRE(((x - (d - bd)) + (-y - bd)) == 0.0);
        REQUIRE(std::fma(x, y, -p) == 0.0);
        failures += add(a, b).bits != rounder.round(s);
        failures += sub(a, b).bits != rounder.round(d);
        failures += mul(a, b).bits != rounder.round(p);
    }
    CHECK(failures == 0);
}

TEST_CASE("random posit16 quotients match the rational oracle") {
    const PositConfig cfg(16, 1);
    const oracle::PositRounder rounder(16, 1);
    const auto rng = CounterRng::derive(4, Stream::Test, 0);
    for (std::uint64_t i = 0; i < 20'000; ++i) {
        const auto r = rng.at(i);
        const PositBits a = PositBits::make(static_cast<std::uint32_t>(r), cfg);
        const PositBits b = PositBits::make(static_cast<std::uint32_t>(r >> 16), cfg);
        const auto va = rounder.values()[a.bits];
        const auto vb = rounder.values()[b.bits];
        const std::uint32_t want = (!va || !vb || *vb == 0) ? 0x8000u : rounder.round(Rational(*va / *vb));
        REQUIRE(div(a, b).bits == want);
        REQUIRE(reference::div(a, b).bits == want);
    }
}

TEST_CASE("debug formatting") {
    CHECK(to_string(PositBits{0x4000, PositConfig(16, 1)}) == "0x4000 (+1.0)");
    CHECK(to_string(PositBits{0x8000, PositConfig(16, 1)}) == "0x8000 (NaR)");
    CHECK(to_string(PositBits{0xC0, PositConfig(8, 0)}) == "0xC0 (-1.0)");
}

}  // TEST_SUITE
