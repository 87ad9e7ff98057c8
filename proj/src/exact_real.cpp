#include "posittrain/exact_real.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace posittrain {

int bit_length(const BigUint& v) { return static_cast<int>(boost::multiprecision::msb(v)); }

ExactReal ExactReal::from_scaled(bool negative, BigUint magnitude, std::int64_t lsb_exponent,
                                 bool sticky) {
    if (magnitude == 0) {
        ExactReal z;
        z.negative = negative;
        return z;
    }
    ExactReal r;
    r.kind = ValueKind::Finite;
    r.negative = negative;
    r.exponent = lsb_exponent + bit_length(magnitude);
    r.significand = std::move(magnitude);
    r.sticky = sticky;
    return r;
}

int ExactReal::significand_width() const {
    return kind == ValueKind::Finite ? bit_length(significand) + 1 : 0;
}

ExactReal exact_from_double(double x) {
    if (std::isnan(x) || std::isinf(x)) return ExactReal::nar();
    const auto bits = std::bit_cast<std::uint64_t>(x);
    const bool negative = (bits >> 63) != 0;
    const int biased = static_cast<int>((bits >> 52) & 0x7FF);
    std::uint64_t mantissa = bits & ((std::uint64_t{1} << 52) - 1);
    if (biased == 0 && mantissa == 0) {
        ExactReal z;
        z.negative = negative;
        return z;
    }
    int lsb = biased == 0 ? -1074 : biased - 1075;
    if (biased != 0) mantissa |= std::uint64_t{1} << 52;
    return ExactReal::from_scaled(negative, BigUint(mantissa), lsb);
}

double approx_to_double(const ExactReal& x) {
    switch (x.kind) {
        case ValueKind::Zero: return x.negative ? -0.0 : 0.0;
        case ValueKind::NaR: return std::numeric_limits<double>::quiet_NaN();
        case ValueKind::Finite: break;
    }
    const int width = x.significand_width();
    const int keep = std::min(width, 64);
    const BigUint top = x.significand >> (width - keep);
    const double mag = std::ldexp(static_cast<double>(top.convert_to<std::uint64_t>()),
                                  static_cast<int>(x.exponent - keep + 1));
    return x.negative ? -mag : mag;
}

ExactReal exact_neg(ExactReal a) {
    a.negative = !a.negative;
    return a;
}

ExactReal exact_add(const ExactReal& a, const ExactReal& b) {
    if (a.is_nar() || b.is_nar()) return ExactReal::nar();
    if (a.is_zero()) return b.is_zero() ? ExactReal::from_scaled(a.negative && b.negative, 0, 0) : b;
    if (b.is_zero()) return a;

    const std::int64_t lsb = std::min(a.lsb_exponent(), b.lsb_exponent());
    const BigUint ma = a.significand << static_cast<unsigned>(a.lsb_exponent() - lsb);
    const BigUint mb = b.significand << static_cast<unsigned>(b.lsb_exponent() - lsb);
    const bool sticky = a.sticky || b.sticky;
    if (a.negative == b.negative) return ExactReal::from_scaled(a.negative, ma + mb, lsb, sticky);
    if (ma >= mb) return ExactReal::from_scaled(a.negative, ma - mb, lsb, sticky);
    return ExactReal::from_scaled(b.negative, mb - ma, lsb, sticky);
}

ExactReal exact_sub(const ExactReal& a, const ExactReal& b) { return exact_add(a, exact_neg(b)); }

ExactReal exact_mul(const ExactReal& a, const ExactReal& b) {
    if (a.is_nar() || b.is_nar()) return ExactReal::nar();
    const bool negative = a.negative != b.negative;
    if (a.is_zero() || b.is_zero()) return ExactReal::from_scaled(negative, 0, 0);
    return ExactReal::from_scaled(negative, a.significand * b.significand,
                                  a.lsb_exponent() + b.lsb_exponent(), a.sticky || b.sticky);
}

ExactReal exact_div(const ExactReal& a, const ExactReal& b, int precision_bits) {
    if (a.is_nar() || b.is_nar() || b.is_zero()) return ExactReal::nar();
    const bool negative = a.negative != b.negative;
    if (a.is_zero()) return ExactReal::from_scaled(negative, 0, 0);

    const int wa = a.significand_width();
    const int wb = b.significand_width();
    const int shift = std::max(0, precision_bits + wb - wa + 1);
    const BigUint numerator = a.significand << shift;
    BigUint quotient;
    BigUint remainder;
    boost::multiprecision::divide_qr(numerator, b.significand, quotient, remainder);
    return ExactReal::from_scaled(negative, std::move(quotient),
                                  a.lsb_exponent() - shift - b.lsb_exponent(),
                                  remainder != 0 || a.sticky || b.sticky);
}

std::uint64_t round_to_ieee(const ExactReal& x, IeeeLayout layout) {
    if (x.is_nar()) throw std::invalid_argument("round_to_ieee: NaR has no IEEE finite encoding");
    const std::uint64_t sign = x.negative ? layout.sign_bit() : 0;
    if (x.is_zero()) return sign;

    const std::int64_t min_quantum = layout.min_normal_exponent() - layout.fraction_bits;
    const std::int64_t quantum = std::max<std::int64_t>(x.exponent - layout.fraction_bits, min_quantum);
    const std::int64_t lsb = x.lsb_exponent();

    BigUint units;
    if (lsb >= quantum) {
        if (x.sticky) throw std::logic_error("round_to_ieee: sticky value lacks a guard bit");
        units = x.significand << static_cast<unsigned>(lsb - quantum);
    } else {
        const auto shift = static_cast<unsigned>(quantum - lsb);
        units = x.significand >> shift;
        const bool guard = boost::multiprecision::bit_test(x.significand, shift - 1);
        const BigUint below = x.significand & ((BigUint(1) << (shift - 1)) - 1);
        const bool rest = below != 0 || x.sticky;
        if (guard && (rest || boost::multiprecision::bit_test(units, 0))) ++units;
    }

    // Encoding is linear across the subnormal/normal boundary and carries
    // into the exponent field naturally.
    const std::int64_t steps = quantum - min_quantum;
    if (steps > static_cast<std::int64_t>(layout.inf_bits() >> layout.fraction_bits)) return sign | layout.inf_bits();
    const BigUint encoded = (BigUint(steps) << layout.fraction_bits) + units;
    if (encoded >= layout.inf_bits()) return sign | layout.inf_bits();
    return sign | encoded.convert_to<std::uint64_t>();
}

std::string to_string(const ExactReal& x) {
    std::ostringstream os;
    switch (x.kind) {
        case ValueKind::Zero: os << (x.negative ? "-0" : "0"); break;
        case ValueKind::NaR: os << "NaR"; break;
        case ValueKind::Finite:
            os << (x.negative ? "-" : "+") << "0x" << std::hex << x.significand << std::dec << "*2^"
               << x.lsb_exponent() << (x.sticky ? "+" : "");
            break;
    }
    return os.str();
}

}  // namespace posittrain
