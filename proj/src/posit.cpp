#include "posittrain/posit.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace posittrain {

namespace {

using u128 = unsigned __int128;

std::uint64_t low_mask(int bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }

void require_same_config(PositBits a, PositBits b) {
    if (a.cfg != b.cfg) throw std::invalid_argument("posit operands have different configurations");
}

std::uint32_t saturated(bool negative, std::uint32_t magnitude_pattern, PositConfig cfg) {
    return negative ? (0u - magnitude_pattern) & cfg.mask() : magnitude_pattern;
}

}  // namespace

PositConfig::PositConfig(int n, int es) : n_(n), es_(es) {
    if (n < 2 || n > kMaxBits) throw std::invalid_argument("posit width must be in 2..32");
    if (es < 0 || es > kMaxEs) throw std::invalid_argument("posit es must be in 0..4");
}

std::string to_string(const PositConfig& cfg) {
    return "posit<" + std::to_string(cfg.n()) + "," + std::to_string(cfg.es()) + ">";
}

DecodedPosit decode(PositBits p) {
    const PositConfig cfg = p.cfg;
    DecodedPosit d;
    if (p.bits == 0) return d;
    if (p.bits == cfg.nar_pattern()) {
        d.kind = ValueKind::NaR;
        return d;
    }
    d.kind = ValueKind::Finite;
    d.negative = ((p.bits >> (cfg.n() - 1)) & 1u) != 0;
    const std::uint32_t mag = d.negative ? (0u - p.bits) & cfg.mask() : p.bits;

    int pos = cfg.n() - 2;
    const std::uint32_t regime_bit = (mag >> pos) & 1u;
    int run = 0;
    while (pos >= 0 && ((mag >> pos) & 1u) == regime_bit) {
        ++run;
        --pos;
    }
    d.regime = regime_bit != 0 ? run - 1 : -run;
    if (pos >= 0) --pos;  // terminating bit

    const int remaining = pos + 1;
    const int exp_bits = std::min(cfg.es(), remaining);
    std::uint32_t e = 0;
    if (exp_bits > 0) e = (mag >> (remaining - exp_bits)) & ((1u << exp_bits) - 1);
    d.exponent = e << (cfg.es() - exp_bits);
    d.fraction_bits = remaining - exp_bits;
    d.fraction = mag & static_cast<std::uint32_t>(low_mask(d.fraction_bits));
    return d;
}

ExactReal to_exact(const DecodedPosit& d, PositConfig cfg) {
    switch (d.kind) {
        case ValueKind::Zero: return ExactReal::zero();
        case ValueKind::NaR: return ExactReal::nar();
        case ValueKind::Finite: break;
    }
    const BigUint sig = (BigUint(1) << d.fraction_bits) | d.fraction;
    return ExactReal::from_scaled(d.negative, sig, d.scale(cfg.es()) - d.fraction_bits);
}

PositBits encode_round(const ExactReal& x, PositConfig cfg) {
    if (x.is_zero()) return PositBits::zero(cfg);
    if (x.is_nar()) return PositBits::nar(cfg);

    const std::int64_t scale = x.exponent;
    if (scale > cfg.max_scale()) return {saturated(x.negative, cfg.maxpos_pattern(), cfg), cfg};
    if (scale < -cfg.max_scale()) return {saturated(x.negative, cfg.minpos_pattern(), cfg), cfg};

    const std::int64_t k = scale >> cfg.es();  // floor division
    const std::int64_t e = scale - (k << cfg.es());

    // Unbounded bit string after the sign: regime, terminator, exponent, fraction.
    BigUint body;
    std::int64_t len = 0;
    if (k >= 0) {
        body = ((BigUint(1) << static_cast<unsigned>(k + 1)) - 1) << 1;
        len = k + 2;
    } else {
        body = 1;
        len = -k + 1;
    }
    body = (body << cfg.es()) | BigUint(e);
    len += cfg.es();
    const int frac_width = x.significand_width() - 1;
    body = (body << frac_width) | (x.significand - (BigUint(1) << frac_width));
    len += frac_width;

    const std::int64_t keep = cfg.n() - 1;
    std::uint32_t pattern = 0;
    if (len <= keep) {
        if (x.sticky) throw std::logic_error("encode_round: sticky value lacks a guard bit");
        pattern = (body << static_cast<unsigned>(keep - len)).convert_to<std::uint32_t>();
    } else {
        const auto drop = static_cast<unsigned>(len - keep);
        pattern = (body >> drop).convert_to<std::uint32_t>();
        const bool guard = boost::multiprecision::bit_test(body, drop - 1);
        const bool rest = (body & ((BigUint(1) << (drop - 1)) - 1)) != 0 || x.sticky;
        if (guard && (rest || (pattern & 1u) != 0)) ++pattern;
    }
    if (pattern > cfg.maxpos_pattern()) pattern = cfg.maxpos_pattern();
    if (pattern == 0) pattern = cfg.minpos_pattern();
    return {saturated(x.negative, pattern, cfg), cfg};
}

namespace detail {

Unpacked unpack(std::uint32_t bits, PositConfig cfg) {
    Unpacked u;
    if (bits == 0) return u;
    if (bits == cfg.nar_pattern()) {
        u.kind = ValueKind::NaR;
        return u;
    }
    const int n = cfg.n();
    u.kind = ValueKind::Finite;
    u.negative = ((bits >> (n - 1)) & 1u) != 0;
    const std::uint32_t mag = u.negative ? (0u - bits) & cfg.mask() : bits;

    // Left-align the n-1 bits after the sign in a 32-bit word.
    const std::uint32_t body = mag << (33 - n);
    int run;
    int k;
    if ((body >> 31) != 0) {
        run = std::countl_one(body);
        k = run - 1;
    } else {
        run = std::countl_zero(body);
        k = -run;
    }
    if (run > n - 1) run = n - 1;
    int remaining = n - 1 - run;
    if (remaining > 0) --remaining;  // terminating bit
    const std::uint64_t rest = remaining > 0 ? mag & low_mask(remaining) : 0;
    const int exp_bits = std::min(cfg.es(), remaining);
    const int frac_bits = remaining - exp_bits;
    const auto e = static_cast<std::int32_t>((rest >> frac_bits) << (cfg.es() - exp_bits));
    u.scale = (k << cfg.es()) + e;
    u.sig = kHidden | ((rest & low_mask(frac_bits)) << (62 - frac_bits));
    return u;
}

std::uint32_t pack_round(const Unpacked& u, PositConfig cfg) {
    if (u.kind == ValueKind::Zero) return 0;
    if (u.kind == ValueKind::NaR) return cfg.nar_pattern();
    if (u.scale > cfg.max_scale()) return saturated(u.negative, cfg.maxpos_pattern(), cfg);
    if (u.scale < -cfg.max_scale()) return saturated(u.negative, cfg.minpos_pattern(), cfg);

    const int es = cfg.es();
    const int n = cfg.n();
    const std::int32_t k = u.scale >> es;
    const std::uint64_t e = static_cast<std::uint64_t>(u.scale - (k << es));

    std::uint64_t head;
    int head_len;
    if (k >= 0) {
        head = ((std::uint64_t{1} << (k + 1)) - 1) << 1;
        head_len = k + 2;
    } else {
        head = 1;
        head_len = -k + 1;
    }
    head = (head << es) | e;
    head_len += es;

    // Take n bits of the string: n-1 pattern bits plus the guard bit.
    const std::uint64_t frac = u.sig & (kHidden - 1);
    std::uint64_t top;
    bool lost;
    if (head_len >= n) {
        const int drop = head_len - n;
        top = head >> drop;
        lost = (head & low_mask(drop)) != 0 || frac != 0 || u.sticky;
    } else {
        const int need = n - head_len;
        top = (head << need) | (frac >> (62 - need));
        lost = (frac & low_mask(62 - need)) != 0 || u.sticky;
    }
    auto pattern = static_cast<std::uint32_t>(top >> 1);
    const bool guard = (top & 1u) != 0;
    if (guard && (lost || (pattern & 1u) != 0)) ++pattern;
    if (pattern > cfg.maxpos_pattern()) pattern = cfg.maxpos_pattern();
    if (pattern == 0) pattern = cfg.minpos_pattern();
    return saturated(u.negative, pattern, cfg);
}

Unpacked add(const Unpacked& x, const Unpacked& y) {
    if (x.kind == ValueKind::NaR || y.kind == ValueKind::NaR) return Unpacked{ValueKind::NaR};
    if (x.kind == ValueKind::Zero) return y;
    if (y.kind == ValueKind::Zero) return x;

    const bool swap = x.scale < y.scale || (x.scale == y.scale && x.sig < y.sig);
    const Unpacked& a = swap ? y : x;
    const Unpacked& b = swap ? x : y;

    const int shift = a.scale - b.scale;
    std::uint64_t aligned = 0;
    bool shifted_out = true;
    if (shift < 64) {
        aligned = b.sig >> shift;
        shifted_out = (b.sig & low_mask(shift)) != 0;
    }

    Unpacked r;
    r.kind = ValueKind::Finite;
    r.negative = a.negative;
    r.scale = a.scale;
    r.sticky = shifted_out || a.sticky || b.sticky;
    if (a.negative == b.negative) {
        std::uint64_t s = a.sig + aligned;
        if ((s >> 63) != 0) {
            r.sticky = r.sticky || (s & 1u) != 0;
            s >>= 1;
            ++r.scale;
        }
        r.sig = s;
        return r;
    }
    // The exact difference lies in (s, s + 1) when bits were shifted out.
    const std::uint64_t s = a.sig - aligned - (shifted_out ? 1u : 0u);
    if (s == 0 && !r.sticky) return Unpacked{};
    const int lz = std::countl_zero(s) - 1;
    r.sig = s << lz;
    r.scale -= lz;
    return r;
}

Unpacked mul(const Unpacked& a, const Unpacked& b) {
    if (a.kind == ValueKind::NaR || b.kind == ValueKind::NaR) return Unpacked{ValueKind::NaR};
    if (a.kind == ValueKind::Zero || b.kind == ValueKind::Zero) return Unpacked{};
    const u128 p = static_cast<u128>(a.sig) * b.sig;  // leading bit at 124 or 125
    const int shift = (p >> 125) != 0 ? 63 : 62;
    Unpacked r;
    r.kind = ValueKind::Finite;
    r.negative = a.negative != b.negative;
    r.scale = a.scale + b.scale + (shift - 62);
    r.sig = static_cast<std::uint64_t>(p >> shift);
    r.sticky = (p & ((static_cast<u128>(1) << shift) - 1)) != 0 || a.sticky || b.sticky;
    return r;
}

Unpacked div(const Unpacked& a, const Unpacked& b) {
    if (a.kind == ValueKind::NaR || b.kind == ValueKind::NaR || b.kind == ValueKind::Zero)
        return Unpacked{ValueKind::NaR};
    if (a.kind == ValueKind::Zero) return Unpacked{};
    const int shift = a.sig >= b.sig ? 62 : 63;
    const u128 num = static_cast<u128>(a.sig) << shift;
    Unpacked r;
    r.kind = ValueKind::Finite;
    r.negative = a.negative != b.negative;
    r.scale = a.scale - b.scale - (shift - 62);
    r.sig = static_cast<std::uint64_t>(num / b.sig);
    r.sticky = (num % b.sig) != 0 || a.sticky || b.sticky;
    return r;
}

Unpacked unpack_double(double x) {
    Unpacked u;
    if (std::isnan(x) || std::isinf(x)) {
        u.kind = ValueKind::NaR;
        return u;
    }
    if (x == 0.0) return u;
    const auto bits = std::bit_cast<std::uint64_t>(x);
    u.kind = ValueKind::Finite;
    u.negative = (bits >> 63) != 0;
    const int biased = static_cast<int>((bits >> 52) & 0x7FF);
    std::uint64_t mantissa = bits & low_mask(52);
    if (biased != 0) {
        u.scale = biased - 1023;
        u.sig = (mantissa | (std::uint64_t{1} << 52)) << 10;
    } else {
        const int lz = std::countl_zero(mantissa) - 1;
        u.sig = mantissa << lz;
        u.scale = -1022 - (lz - 10);
    }
    return u;
}

}  // namespace detail

namespace {

template <class Op>
PositBits apply_fast(PositBits a, PositBits b, Op op) {
    require_same_config(a, b);
    const auto r = op(detail::unpack(a.bits, a.cfg), detail::unpack(b.bits, b.cfg));
    return {detail::pack_round(r, a.cfg), a.cfg};
}

}  // namespace

PositBits add(PositBits a, PositBits b) { return apply_fast(a, b, detail::add); }
PositBits sub(PositBits a, PositBits b) {
    return apply_fast(a, b, [](const detail::Unpacked& x, const detail::Unpacked& y) {
        return detail::add(x, detail::negate(y));
    });
}
PositBits mul(PositBits a, PositBits b) { return apply_fast(a, b, detail::mul); }
PositBits div(PositBits a, PositBits b) { return apply_fast(a, b, detail::div); }

PositBits neg(PositBits a) { return {(0u - a.bits) & a.cfg.mask(), a.cfg}; }

std::strong_ordering compare(PositBits a, PositBits b) {
    require_same_config(a, b);
    if (a.is_nar() || b.is_nar()) throw std::domain_error("NaR is unordered");
    const int shift = 32 - a.cfg.n();
    const auto sa = static_cast<std::int32_t>(a.bits << shift);
    const auto sb = static_cast<std::int32_t>(b.bits << shift);
    return sa <=> sb;
}

PositBits from_f64(double x, PositConfig cfg) {
    return {detail::pack_round(detail::unpack_double(x), cfg), cfg};
}

double to_f64(PositBits p) {
    const auto u = detail::unpack(p.bits, p.cfg);
    switch (u.kind) {
        case ValueKind::Zero: return 0.0;
        case ValueKind::NaR: return std::nan("");
        case ValueKind::Finite: break;
    }
    const double mag = std::ldexp(static_cast<double>(u.sig), u.scale - 62);
    return u.negative ? -mag : mag;
}

std::string to_string(PositBits p) {
    char hex[16];
    std::snprintf(hex, sizeof hex, "0x%0*X", (p.cfg.n() + 3) / 4, p.bits);
    if (p.is_nar()) return std::string(hex) + " (NaR)";
    const double v = to_f64(p);
    char num[64];
    auto [end, ec] = std::to_chars(num, num + sizeof num, v);
    std::string text(num, end);
    if (text.find_first_of(".e") == std::string::npos) text += ".0";
    if (v >= 0) text.insert(text.begin(), '+');
    return std::string(hex) + " (" + text + ")";
}

namespace reference {

int division_precision(PositConfig cfg) { return cfg.n() + cfg.useed_log2() + 3; }

PositBits add(PositBits a, PositBits b) {
    require_same_config(a, b);
    return encode_round(exact_add(to_exact(a), to_exact(b)), a.cfg);
}

PositBits sub(PositBits a, PositBits b) {
    require_same_config(a, b);
    return encode_round(exact_sub(to_exact(a), to_exact(b)), a.cfg);
}

PositBits mul(PositBits a, PositBits b) {
    require_same_config(a, b);
    return encode_round(exact_mul(to_exact(a), to_exact(b)), a.cfg);
}

PositBits div(PositBits a, PositBits b) {
    require_same_config(a, b);
    return encode_round(exact_div(to_exact(a), to_exact(b), division_precision(a.cfg)), a.cfg);
}

}  // namespace reference

}  // namespace posittrain
