#pragma once

#include <cstdint>
#include <optional>

#include "posittrain/exact_real.hpp"
#include "posittrain/oracle.hpp"

namespace testing {

using posittrain::oracle::Rational;

inline std::optional<Rational> rational(const posittrain::ExactReal& x) {
    if (x.is_nar()) return std::nullopt;
    if (x.is_zero()) return Rational(0);
    Rational v(x.significand);
    const auto lsb = x.lsb_exponent();
    const Rational two(2);
    for (std::int64_t i = 0; i < (lsb >= 0 ? lsb : -lsb); ++i) {
        if (lsb >= 0)
            v *= two;
        else
            v /= two;
    }
    return x.negative ? Rational(-v) : v;
}

inline std::uint32_t twos_negate(std::uint32_t p, int n) {
    const std::uint32_t mask = n == 32 ? 0xFFFFFFFFu : (std::uint32_t{1} << n) - 1;
    return (~p + 1u) & mask;
}

}  // namespace testing
