#pragma once

// Posit (type III unum) codec and correctly rounded arithmetic for widths
// 2..32 and exponent sizes 0..4.
//
// Two arithmetic routes exist:
//  * posittrain::add/sub/mul/div work on fixed-width integers with a sticky
//    bit and are used everywhere performance matters.
//  * posittrain::reference::add/... decode into ExactReal, compute exactly
//    with arbitrary-width integers, and round once.
// Both round the unbounded bit string to nearest, ties to the even pattern,
// and saturate at ±maxpos / ±minpos.

#include <compare>
#include <cstdint>
#include <string>

#include "posittrain/exact_real.hpp"

namespace posittrain {

class PositConfig {
public:
    static constexpr int kMaxBits = 32;
    static constexpr int kMaxEs = 4;

    /// Throws std::invalid_argument unless 2 <= n <= 32 and 0 <= es <= 4.
    PositConfig(int n, int es);

    int n() const { return n_; }
    int es() const { return es_; }
    /// log2(useed) = 2^es.
    int useed_log2() const { return 1 << es_; }
    /// Scale of maxpos; minpos has the negated scale.
    int max_scale() const { return (n_ - 2) << es_; }
    std::uint32_t mask() const { return n_ == 32 ? 0xFFFFFFFFu : (std::uint32_t{1} << n_) - 1; }
    std::uint32_t nar_pattern() const { return std::uint32_t{1} << (n_ - 1); }
    std::uint32_t maxpos_pattern() const { return nar_pattern() - 1; }
    std::uint32_t minpos_pattern() const { return 1; }

    friend bool operator==(const PositConfig&, const PositConfig&) = default;

private:
    int n_;
    int es_;
};

std::string to_string(const PositConfig& cfg);

struct PositBits {
    std::uint32_t bits;  // right-aligned; bits >= n are zero
    PositConfig cfg;

    /// Masks `bits` to the config width.
    static PositBits make(std::uint32_t bits, PositConfig cfg) { return {bits & cfg.mask(), cfg}; }
    static PositBits zero(PositConfig cfg) { return {0, cfg}; }
    static PositBits nar(PositConfig cfg) { return {cfg.nar_pattern(), cfg}; }

    bool is_zero() const { return bits == 0; }
    bool is_nar() const { return bits == cfg.nar_pattern(); }

    friend bool operator==(const PositBits&, const PositBits&) = default;
};

struct DecodedPosit {
    ValueKind kind = ValueKind::Zero;
    bool negative = false;
    int regime = 0;                // k
    std::uint32_t exponent = 0;    // e < 2^es
    std::uint32_t fraction = 0;    // f < 2^fraction_bits
    int fraction_bits = 0;         // fs

    /// 2^es·k + e.
    int scale(int es) const { return (regime << es) + static_cast<int>(exponent); }
};

DecodedPosit decode(PositBits p);
ExactReal to_exact(const DecodedPosit& d, PositConfig cfg);
inline ExactReal to_exact(PositBits p) { return to_exact(decode(p), p.cfg); }

/// Rounds to the nearest posit on the unbounded bit string (ties to even
/// pattern). Finite nonzero inputs never produce zero or NaR. A sticky input
/// must carry at least one significand bit past the rounding position.
PositBits encode_round(const ExactReal& x, PositConfig cfg);

PositBits add(PositBits a, PositBits b);
PositBits sub(PositBits a, PositBits b);
PositBits mul(PositBits a, PositBits b);
/// Division by zero yields NaR.
PositBits div(PositBits a, PositBits b);
PositBits neg(PositBits a);

/// Throws std::domain_error if either operand is NaR, std::invalid_argument
/// on config mismatch.
std::strong_ordering compare(PositBits a, PositBits b);

/// NaN and infinities map to NaR.
PositBits from_f64(double x, PositConfig cfg);
/// Exact for every supported config.
double to_f64(PositBits p);

/// e.g. "0x4000 (+1.0)".
std::string to_string(PositBits p);

/// Fixed-width kernels behind the fast route; the tensor backends call them
/// directly to skip re-decoding.
namespace detail {

/// Fixed-width intermediate: value = ±sig × 2^(scale − 62), leading bit of
/// sig at position 62. `sticky` has the same meaning as in ExactReal.
struct Unpacked {
    ValueKind kind = ValueKind::Zero;
    bool negative = false;
    bool sticky = false;
    std::int32_t scale = 0;
    std::uint64_t sig = 0;
};

inline constexpr std::uint64_t kHidden = std::uint64_t{1} << 62;

Unpacked unpack(std::uint32_t bits, PositConfig cfg);
std::uint32_t pack_round(const Unpacked& u, PositConfig cfg);

Unpacked add(const Unpacked& a, const Unpacked& b);
Unpacked mul(const Unpacked& a, const Unpacked& b);
Unpacked div(const Unpacked& a, const Unpacked& b);

inline Unpacked negate(Unpacked u) {
    u.negative = !u.negative;
    return u;
}

Unpacked unpack_double(double x);

}  // namespace detail

namespace reference {

/// Quotient precision of the reference divider: n + 2^es + 3 bits.
int division_precision(PositConfig cfg);

PositBits add(PositBits a, PositBits b);
PositBits sub(PositBits a, PositBits b);
PositBits mul(PositBits a, PositBits b);
PositBits div(PositBits a, PositBits b);

}  // namespace reference

}  // namespace posittrain
