#pragma once

// IEEE-754 binary16 emulation with round-to-nearest-even, gradual underflow
// and a single canonical quiet NaN, plus the binary32 backend guard.

#include <cstdint>
#include <string>

#include "posittrain/exact_real.hpp"

namespace posittrain {

struct Half {
    std::uint16_t bits = 0;

    static constexpr std::uint16_t kCanonicalNaN = 0x7E00;
    static constexpr std::uint16_t kPosInf = 0x7C00;
    static constexpr std::uint16_t kMaxFinite = 0x7BFF;  // 65504

    static constexpr Half from_bits(std::uint16_t b) { return Half{b}; }

    constexpr bool is_nan() const { return (bits & 0x7C00) == 0x7C00 && (bits & 0x03FF) != 0; }
    constexpr bool is_inf() const { return (bits & 0x7FFF) == kPosInf; }
    constexpr bool is_finite() const { return (bits & 0x7C00) != 0x7C00; }
    constexpr bool is_zero() const { return (bits & 0x7FFF) == 0; }
    constexpr bool is_subnormal() const { return (bits & 0x7C00) == 0 && (bits & 0x03FF) != 0; }

    friend constexpr bool operator==(Half, Half) = default;
};

Half h_add(Half a, Half b);
Half h_sub(Half a, Half b);
Half h_mul(Half a, Half b);
Half h_div(Half a, Half b);
Half h_neg(Half a);

Half h_from_f64(double x);
double h_to_f64(Half h);

std::string to_string(Half h);

/// Exact value of a finite half; NaN and infinities are not representable.
ExactReal to_exact(Half h);

namespace reference {

/// Same contracts as the h_* functions, computed through ExactReal.
Half h_add(Half a, Half b);
Half h_sub(Half a, Half b);
Half h_mul(Half a, Half b);
Half h_div(Half a, Half b);

}  // namespace reference

/// True when host binary32 arithmetic rounds to nearest-even and keeps
/// subnormals. Evaluated once; the binary32 backend emulates otherwise.
bool host_binary32_is_ieee_rne();

/// binary64 -> binary32 rounding without relying on host float conversion.
float f32_round_soft(double x);

}  // namespace posittrain
