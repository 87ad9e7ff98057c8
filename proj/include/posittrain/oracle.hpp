#pragma once

// Reference models used only to check the library. They share no code with
// the codec or the arithmetic kernels: posit values are read straight off
// the bit string as rationals, and rounding is a search over the sorted set
// of representable values.

#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace posittrain::oracle {

using Rational = boost::multiprecision::cpp_rational;

/// Value of an n-bit posit pattern (sign, regime, exponent, fraction);
/// nullopt for NaR.
std::optional<Rational> posit_value(std::uint32_t bits, int n, int es);

/// Nearest n-bit posit to a real. Ties, decided against the value of the
/// (n+1)-bit pattern halfway between two neighbours, go to the even pattern.
/// Saturates at maxpos/minpos and never returns zero for nonzero input.
class PositRounder {
public:
    PositRounder(int n, int es);

    std::uint32_t round(const Rational& x) const;
    /// Same result for a double that is the exact value of interest.
    std::uint32_t round(double x) const;
    /// True when x sits exactly on a tie point between two neighbours.
    bool is_tie(const Rational& x) const;

    int n() const { return n_; }
    int es() const { return es_; }
    /// Value of every pattern as a rational; nullopt at NaR.
    const std::vector<std::optional<Rational>>& values() const { return pattern_values_; }

private:
    template <class T>
    std::uint32_t round_impl(const T& x, const std::vector<T>& values, const std::vector<T>& mids) const;

    int n_;
    int es_;
    std::vector<std::optional<Rational>> pattern_values_;
    // Positive values of patterns 1..maxpos and the tie points between them.
    std::vector<Rational> pos_;
    std::vector<Rational> mid_;
    std::vector<double> pos_d_;
    std::vector<double> mid_d_;
};

/// binary16 value from the field formula; NaN for NaN patterns.
double half_value(std::uint16_t bits);
/// Nearest binary16 to a double, ties to even, with ±inf from 65520 up and
/// 0x7E00 for NaN. Zero results keep the sign of x.
std::uint16_t half_round(double x);

/// Softmax cross-entropy of a dense ReLU network evaluated in binary64.
/// weights[l] is [in × out] row-major, the last layer is linear.
struct Mlp64 {
    std::vector<std::size_t> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    double loss(const std::vector<double>& x, const std::vector<std::size_t>& labels) const;
};

}  // namespace posittrain::oracle
