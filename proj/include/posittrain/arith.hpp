#pragma once

// Scalar arithmetic backends behind tensor_nn. Every backend stores values as
// raw bit patterns in a uint32_t and rounds each operation to its format.
//
// Transcendentals (exp, log, sqrt, pow) convert the operand to binary64,
// apply the host function and round back to the format.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "posittrain/exact_real.hpp"
#include "posittrain/half.hpp"
#include "posittrain/numeric_format.hpp"
#include "posittrain/posit.hpp"

namespace posittrain {

class PositArith {
public:
    explicit PositArith(PositConfig cfg);

    const PositConfig& config() const { return cfg_; }

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
        return detail::pack_round(detail::add(unpack(a), unpack(b)), cfg_);
    }
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
        return detail::pack_round(detail::add(unpack(a), detail::negate(unpack(b))), cfg_);
    }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
        return detail::pack_round(detail::mul(unpack(a), unpack(b)), cfg_);
    }
    std::uint32_t div(std::uint32_t a, std::uint32_t b) const {
        return detail::pack_round(detail::div(unpack(a), unpack(b)), cfg_);
    }
    std::uint32_t from_double(double x) const { return detail::pack_round(detail::unpack_double(x), cfg_); }
    double to_double(std::uint32_t a) const;

    std::uint32_t zero() const { return 0; }
    bool is_non_finite(std::uint32_t a) const { return a == cfg_.nar_pattern(); }
    bool is_positive(std::uint32_t a) const {
        return a != 0 && ((a >> (cfg_.n() - 1)) & 1u) == 0;
    }

    ExactReal exact(std::uint32_t a) const { return to_exact(PositBits{a, cfg_}); }
    std::uint32_t round_exact(const ExactReal& x) const { return encode_round(x, cfg_).bits; }

private:
    detail::Unpacked unpack(std::uint32_t a) const {
        return table_ ? (*table_)[a] : detail::unpack(a, cfg_);
    }

    PositConfig cfg_;
    // Decoded patterns for n <= 16.
    std::shared_ptr<const std::vector<detail::Unpacked>> table_;
};

class HalfArith {
public:
    HalfArith();

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const { return round(value(a) + value(b)); }
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return round(value(a) - value(b)); }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const { return round(value(a) * value(b)); }
    std::uint32_t div(std::uint32_t a, std::uint32_t b) const { return round(value(a) / value(b)); }
    std::uint32_t from_double(double x) const { return round(x); }
    double to_double(std::uint32_t a) const { return value(a); }

    std::uint32_t zero() const { return 0; }
    bool is_non_finite(std::uint32_t a) const { return (a & 0x7C00u) == 0x7C00u; }
    bool is_positive(std::uint32_t a) const { return (a & 0x8000u) == 0 && (a & 0x7FFFu) != 0 && !is_nan(a); }

    ExactReal exact(std::uint32_t a) const { return to_exact(Half{static_cast<std::uint16_t>(a)}); }
    std::uint32_t round_exact(const ExactReal& x) const {
        return static_cast<std::uint32_t>(round_to_ieee(x, kBinary16));
    }

private:
    static bool is_nan(std::uint32_t a) { return (a & 0x7C00u) == 0x7C00u && (a & 0x3FFu) != 0; }
    double value(std::uint32_t a) const { return (*table_)[a & 0xFFFFu]; }
    static std::uint32_t round(double x) { return h_from_f64(x).bits; }

    std::shared_ptr<const std::vector<double>> table_;
};

class Float32Arith {
public:
    Float32Arith() : native_(host_binary32_is_ieee_rne()) {}

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
        return native_ ? bits(value(a) + value(b)) : soft(double{value(a)} + double{value(b)});
    }
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const {
        return native_ ? bits(value(a) - value(b)) : soft(double{value(a)} - double{value(b)});
    }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
        return native_ ? bits(value(a) * value(b)) : soft(double{value(a)} * double{value(b)});
    }
    std::uint32_t div(std::uint32_t a, std::uint32_t b) const {
        return native_ ? bits(value(a) / value(b)) : soft(double{value(a)} / double{value(b)});
    }
    std::uint32_t from_double(double x) const { return native_ ? bits(static_cast<float>(x)) : soft(x); }
    double to_double(std::uint32_t a) const { return value(a); }

    std::uint32_t zero() const { return 0; }
    bool is_non_finite(std::uint32_t a) const { return (a & 0x7F800000u) == 0x7F800000u; }
    bool is_positive(std::uint32_t a) const { return value(a) > 0.0f; }

    ExactReal exact(std::uint32_t a) const { return exact_from_double(value(a)); }
    std::uint32_t round_exact(const ExactReal& x) const {
        return static_cast<std::uint32_t>(round_to_ieee(x, kBinary32));
    }

    bool native() const { return native_; }

private:
    static float value(std::uint32_t a) { return std::bit_cast<float>(a); }
    static std::uint32_t bits(float x) { return std::bit_cast<std::uint32_t>(x); }
    static std::uint32_t soft(double x) { return bits(f32_round_soft(x)); }

    bool native_;
};

/// Shared, lazily built backend for a posit config.
const PositArith& posit_arith(PositConfig cfg);
const HalfArith& half_arith();
const Float32Arith& float32_arith();

/// Invokes `f` with the backend of `fmt`; the inner loops instantiate per backend.
template <class F>
decltype(auto) with_arith(const NumericFormat& fmt, F&& f) {
    switch (fmt.kind()) {
        case FormatKind::Posit: return f(posit_arith(fmt.posit_config()));
        case FormatKind::Binary16: return f(half_arith());
        case FormatKind::Binary32: break;
    }
    return f(float32_arith());
}

template <class Arith>
std::uint32_t exp_in(const Arith& ar, std::uint32_t a) { return ar.from_double(std::exp(ar.to_double(a))); }
template <class Arith>
std::uint32_t log_in(const Arith& ar, std::uint32_t a) { return ar.from_double(std::log(ar.to_double(a))); }
template <class Arith>
std::uint32_t sqrt_in(const Arith& ar, std::uint32_t a) { return ar.from_double(std::sqrt(ar.to_double(a))); }
template <class Arith>
std::uint32_t pow_in(const Arith& ar, std::uint32_t a, double exponent) {
    return ar.from_double(std::pow(ar.to_double(a), exponent));
}

/// A single format-tagged value.
struct Scalar {
    NumericFormat format;
    std::uint32_t bits = 0;

    static Scalar from_double(double x, const NumericFormat& fmt);
    double to_double() const;
    bool is_non_finite() const;

    friend Scalar operator+(const Scalar& a, const Scalar& b);
    friend Scalar operator-(const Scalar& a, const Scalar& b);
    friend Scalar operator*(const Scalar& a, const Scalar& b);
    friend Scalar operator/(const Scalar& a, const Scalar& b);
    friend bool operator==(const Scalar&, const Scalar&) = default;
};

}  // namespace posittrain
