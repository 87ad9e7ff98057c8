#pragma once

// Exact intermediate values used by the reference arithmetic paths.
//
// An ExactReal is sign × significand × 2^(exponent − width + 1), where the
// significand is an arbitrary-width integer whose top bit is the implicit 1.
// When `sticky` is set the true value lies strictly between that number and
// the next significand step above it (in magnitude).

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace posittrain {

using BigUint = boost::multiprecision::cpp_int;

enum class ValueKind : std::uint8_t { Zero, NaR, Finite };

struct ExactReal {
    ValueKind kind = ValueKind::Zero;
    bool negative = false;
    std::int64_t exponent = 0;  // scale of the leading significand bit
    BigUint significand;        // normalized: leading bit set when Finite
    bool sticky = false;

    static ExactReal zero() { return {}; }
    static ExactReal nar() {
        ExactReal r;
        r.kind = ValueKind::NaR;
        return r;
    }

    /// Builds magnitude × 2^lsb_exponent and normalizes it. A zero magnitude
    /// without sticky yields Zero.
    static ExactReal from_scaled(bool negative, BigUint magnitude, std::int64_t lsb_exponent,
                                 bool sticky = false);

    bool is_zero() const { return kind == ValueKind::Zero; }
    bool is_nar() const { return kind == ValueKind::NaR; }
    bool is_finite() const { return kind == ValueKind::Finite; }

    int significand_width() const;
    /// Exponent of the least significant significand bit.
    std::int64_t lsb_exponent() const { return exponent - significand_width() + 1; }
};

/// Index of the highest set bit (0-based). Requires a nonzero argument.
int bit_length(const BigUint& v);

/// Exact binary64 value; NaN and infinities map to NaR.
ExactReal exact_from_double(double x);
/// Nearest binary64 approximation (diagnostics only).
double approx_to_double(const ExactReal& x);

ExactReal exact_neg(ExactReal a);
ExactReal exact_add(const ExactReal& a, const ExactReal& b);
ExactReal exact_sub(const ExactReal& a, const ExactReal& b);
ExactReal exact_mul(const ExactReal& a, const ExactReal& b);
/// Quotient truncated to at least `precision_bits` significant bits, remainder
/// folded into sticky. Division by zero yields NaR.
ExactReal exact_div(const ExactReal& a, const ExactReal& b, int precision_bits);

/// IEEE-754 binary interchange layout.
struct IeeeLayout {
    int exponent_bits;
    int fraction_bits;

    int bias() const { return (1 << (exponent_bits - 1)) - 1; }
    int min_normal_exponent() const { return 1 - bias(); }
    std::uint64_t inf_bits() const { return ((std::uint64_t{1} << exponent_bits) - 1) << fraction_bits; }
    std::uint64_t sign_bit() const { return std::uint64_t{1} << (exponent_bits + fraction_bits); }
};

inline constexpr IeeeLayout kBinary16{5, 10};
inline constexpr IeeeLayout kBinary32{8, 23};

/// Round a Zero or Finite value to nearest-even in the given layout. Overflow
/// produces ±inf, underflow goes through subnormals to ±0.
std::uint64_t round_to_ieee(const ExactReal& x, IeeeLayout layout);

std::string to_string(const ExactReal& x);

}  // namespace posittrain
