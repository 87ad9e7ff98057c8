#include "posittrain/half.hpp"

#include <bit>
#include <cfenv>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace posittrain {

namespace {

constexpr std::uint16_t kSign = 0x8000;

Half canonical(Half h) { return h.is_nan() ? Half{Half::kCanonicalNaN} : h; }

}  // namespace

Half h_from_f64(double x) {
    const auto b = std::bit_cast<std::uint64_t>(x);
    const std::uint16_t sign = (b >> 63) != 0 ? kSign : 0;
    const int biased = static_cast<int>((b >> 52) & 0x7FF);
    const std::uint64_t mantissa = b & ((std::uint64_t{1} << 52) - 1);
    if (biased == 0x7FF) return Half{mantissa != 0 ? Half::kCanonicalNaN : static_cast<std::uint16_t>(sign | Half::kPosInf)};

    const int e = biased - 1023;
    // Below 2^-25 everything rounds to zero; binary64 subnormals land here too.
    if (biased == 0 || e < -25) return Half{sign};

    const std::uint64_t m53 = mantissa | (std::uint64_t{1} << 52);
    const int quantum = std::max(e - 10, -24);
    const int shift = quantum - (e - 52);
    std::uint64_t units = m53 >> shift;
    const bool guard = ((m53 >> (shift - 1)) & 1u) != 0;
    const bool rest = (m53 & ((std::uint64_t{1} << (shift - 1)) - 1)) != 0;
    if (guard && (rest || (units & 1u) != 0)) ++units;

    const std::uint64_t encoded = (static_cast<std::uint64_t>(quantum + 24) << 10) + units;
    if (encoded >= Half::kPosInf) return Half{static_cast<std::uint16_t>(sign | Half::kPosInf)};
    return Half{static_cast<std::uint16_t>(sign | encoded)};
}

double h_to_f64(Half h) {
    const bool negative = (h.bits & kSign) != 0;
    const int field = (h.bits >> 10) & 0x1F;
    const int fraction = h.bits & 0x3FF;
    double mag;
    if (field == 0x1F) {
        if (fraction != 0) return std::numeric_limits<double>::quiet_NaN();
        mag = std::numeric_limits<double>::infinity();
    } else if (field == 0) {
        mag = std::ldexp(fraction, -24);
    } else {
        mag = std::ldexp(fraction | 0x400, field - 25);
    }
    return negative ? -mag : mag;
}

// Every binary16 sum, difference and product is exact in binary64, and the
// quotient is rounded once more; 53 >= 2*11 + 2 keeps that second rounding
// harmless.
Half h_add(Half a, Half b) { return h_from_f64(h_to_f64(a) + h_to_f64(b)); }
Half h_sub(Half a, Half b) { return h_from_f64(h_to_f64(a) - h_to_f64(b)); }
Half h_mul(Half a, Half b) { return h_from_f64(h_to_f64(a) * h_to_f64(b)); }
Half h_div(Half a, Half b) { return h_from_f64(h_to_f64(a) / h_to_f64(b)); }
Half h_neg(Half a) { return canonical(Half{static_cast<std::uint16_t>(a.bits ^ kSign)}); }

ExactReal to_exact(Half h) {
    const bool negative = (h.bits & kSign) != 0;
    const int field = (h.bits >> 10) & 0x1F;
    const unsigned fraction = h.bits & 0x3FF;
    if (field == 0x1F) return ExactReal::nar();
    if (field == 0) return ExactReal::from_scaled(negative, fraction, -24);
    return ExactReal::from_scaled(negative, fraction | 0x400u, field - 25);
}

std::string to_string(Half h) {
    char hex[8];
    std::snprintf(hex, sizeof hex, "0x%04X", h.bits);
    if (h.is_nan()) return std::string(hex) + " (NaN)";
    char num[64];
    auto [end, ec] = std::to_chars(num, num + sizeof num, h_to_f64(h));
    return std::string(hex) + " (" + std::string(num, end) + ")";
}

namespace reference {

namespace {

constexpr Half kNaN{Half::kCanonicalNaN};

bool sign_of(Half h) { return (h.bits & kSign) != 0; }
Half signed_inf(bool negative) { return Half{static_cast<std::uint16_t>((negative ? kSign : 0) | Half::kPosInf)}; }
Half signed_zero(bool negative) { return Half{static_cast<std::uint16_t>(negative ? kSign : 0)}; }

Half round_half(const ExactReal& x) { return Half{static_cast<std::uint16_t>(round_to_ieee(x, kBinary16))}; }

}  // namespace

Half h_add(Half a, Half b) {
    if (a.is_nan() || b.is_nan()) return kNaN;
    if (a.is_inf() || b.is_inf()) {
        if (a.is_inf() && b.is_inf() && sign_of(a) != sign_of(b)) return kNaN;
        return a.is_inf() ? a : b;
    }
    if (a.is_zero() && b.is_zero()) return signed_zero(sign_of(a) && sign_of(b));
    const ExactReal sum = exact_add(to_exact(a), to_exact(b));
    if (sum.is_zero()) return signed_zero(false);
    return round_half(sum);
}

Half h_sub(Half a, Half b) { return reference::h_add(a, Half{static_cast<std::uint16_t>(b.bits ^ kSign)}); }

Half h_mul(Half a, Half b) {
    if (a.is_nan() || b.is_nan()) return kNaN;
    const bool negative = sign_of(a) != sign_of(b);
    if (a.is_inf() || b.is_inf()) {
        if (a.is_zero() || b.is_zero()) return kNaN;
        return signed_inf(negative);
    }
    if (a.is_zero() || b.is_zero()) return signed_zero(negative);
    return round_half(exact_mul(to_exact(a), to_exact(b)));
}

Half h_div(Half a, Half b) {
    if (a.is_nan() || b.is_nan()) return kNaN;
    const bool negative = sign_of(a) != sign_of(b);
    if (a.is_inf()) return b.is_inf() ? kNaN : signed_inf(negative);
    if (b.is_inf()) return signed_zero(negative);
    if (b.is_zero()) return a.is_zero() ? kNaN : signed_inf(negative);
    if (a.is_zero()) return signed_zero(negative);
    return round_half(exact_div(to_exact(a), to_exact(b), 40));
}

}  // namespace reference

namespace {

bool probe_binary32() {
    if (std::fegetround() != FE_TONEAREST) return false;
    volatile float one = 1.0f;
    volatile float half_ulp = std::ldexp(1.0f, -24);
    volatile float next = 1.0f + std::ldexp(1.0f, -23);
    volatile float tiny = std::numeric_limits<float>::denorm_min();
    volatile float three = 3.0f;
    volatile float min_normal = std::numeric_limits<float>::min();
    const bool tie_down = one + half_ulp == 1.0f;
    const bool tie_up = next + half_ulp == 1.0f + std::ldexp(1.0f, -22);
    const bool third = std::bit_cast<std::uint32_t>(one / three) == 0x3EAAAAABu;
    const bool subnormal_kept = min_normal / 4.0f != 0.0f && tiny * 1.5f == tiny * 2.0f;
    const bool subnormal_tie = tiny * 0.5f == 0.0f;
    return tie_down && tie_up && third && subnormal_kept && subnormal_tie;
}

}  // namespace

bool host_binary32_is_ieee_rne() {
    static const bool ok = probe_binary32();
    return ok;
}

float f32_round_soft(double x) {
    if (std::isnan(x)) return std::numeric_limits<float>::quiet_NaN();
    if (std::isinf(x)) return static_cast<float>(x);
    const auto bits = static_cast<std::uint32_t>(round_to_ieee(exact_from_double(x), kBinary32));
    return std::bit_cast<float>(bits);
}

}  // namespace posittrain
