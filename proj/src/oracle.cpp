#include "posittrain/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace posittrain::oracle {

namespace {

Rational pow2(int e) {
    Rational r = 1;
    const Rational two = e >= 0 ? Rational(2) : Rational(1, 2);
    for (int i = 0; i < std::abs(e); ++i) r *= two;
    return r;
}

}  // namespace

std::optional<Rational> posit_value(std::uint32_t bits, int n, int es) {
    std::string s;
    for (int i = n - 1; i >= 0; --i) s.push_back(((bits >> i) & 1u) != 0 ? '1' : '0');
    if (s.find('1') == std::string::npos) return Rational(0);
    if (s[0] == '1' && s.find('1', 1) == std::string::npos) return std::nullopt;

    const bool negative = s[0] == '1';
    if (negative) {
        // Two's complement: invert, then add one.
        for (auto& c : s) c = c == '1' ? '0' : '1';
        for (auto it = s.rbegin(); it != s.rend(); ++it) {
            if (*it == '0') {
                *it = '1';
                break;
            }
            *it = '0';
        }
    }

    std::size_t i = 1;
    const char r = s[1];
    int run = 0;
    while (i < s.size() && s[i] == r) {
        ++run;
        ++i;
    }
    const int k = r == '1' ? run - 1 : -run;
    ++i;  // terminating bit, if present

    int e = 0;
    for (int j = 0; j < es; ++j) {
        e <<= 1;
        if (i < s.size()) e |= s[i++] == '1' ? 1 : 0;
    }

    Rational frac = 1;
    Rational weight(1, 2);
    for (; i < s.size(); ++i) {
        if (s[i] == '1') frac += weight;
        weight /= 2;
    }

    Rational v = pow2(k * (1 << es) + e) * frac;
    return negative ? Rational(-v) : v;
}

PositRounder::PositRounder(int n, int es) : n_(n), es_(es) {
    if (n < 2 || n > 31) throw std::invalid_argument("oracle rounder supports 2 <= n <= 31");
    const std::uint32_t count = std::uint32_t{1} << n;
    pattern_values_.reserve(count);
    for (std::uint32_t p = 0; p < count; ++p) pattern_values_.push_back(posit_value(p, n, es));
    const std::uint32_t maxpos = (count >> 1) - 1;
    for (std::uint32_t p = 1; p <= maxpos; ++p) {
        pos_.push_back(*pattern_values_[p]);
        pos_d_.push_back(pos_.back().convert_to<double>());
    }
    for (std::uint32_t p = 1; p < maxpos; ++p) {
        mid_.push_back(*posit_value((p << 1) | 1u, n + 1, es));
        mid_d_.push_back(mid_.back().convert_to<double>());
    }
    // The double tables are only usable when every entry is exact.
    for (std::size_t j = 0; j < pos_.size(); ++j)
        if (Rational(pos_d_[j]) != pos_[j]) pos_d_.clear();
    for (std::size_t j = 0; j < mid_.size() && !pos_d_.empty(); ++j)
        if (Rational(mid_d_[j]) != mid_[j]) pos_d_.clear();
}

template <class T>
std::uint32_t PositRounder::round_impl(const T& x, const std::vector<T>& values, const std::vector<T>& mids) const {
    if (x == 0) return 0;
    const bool negative = x < 0;
    const T a = negative ? T(-x) : x;
    std::uint32_t pattern;
    if (a >= values.back()) {
        pattern = static_cast<std::uint32_t>(values.size());
    } else if (a <= values.front()) {
        pattern = 1;
    } else {
        const auto hi = static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), a) - values.begin());
        const std::size_t lo = hi - 1;
        if (values[lo] == a) {
            pattern = static_cast<std::uint32_t>(lo + 1);
        } else if (a < mids[lo]) {
            pattern = static_cast<std::uint32_t>(lo + 1);
        } else if (a > mids[lo]) {
            pattern = static_cast<std::uint32_t>(hi + 1);
        } else {
            pattern = static_cast<std::uint32_t>((lo + 1) % 2 == 0 ? lo + 1 : hi + 1);
        }
    }
    const std::uint32_t mask = (std::uint32_t{1} << n_) - 1;
    return negative ? (~pattern + 1u) & mask : pattern;
}

std::uint32_t PositRounder::round(const Rational& x) const { return round_impl(x, pos_, mid_); }

std::uint32_t PositRounder::round(double x) const {
    if (!std::isfinite(x)) return std::uint32_t{1} << (n_ - 1);
    if (pos_d_.empty()) return round(Rational(x));
    return round_impl(x, pos_d_, mid_d_);
}

bool PositRounder::is_tie(const Rational& x) const {
    const Rational a = x < 0 ? Rational(-x) : x;
    return std::binary_search(mid_.begin(), mid_.end(), a);
}

double half_value(std::uint16_t bits) {
    const int e = (bits >> 10) & 0x1F;
    const int f = bits & 0x3FF;
    const double sign = (bits & 0x8000) != 0 ? -1.0 : 1.0;
    if (e == 31) return f != 0 ? std::numeric_limits<double>::quiet_NaN() : sign * std::numeric_limits<double>::infinity();
    if (e == 0) return sign * f * 0x1p-24;
    return sign * (1024 + f) * std::exp2(e - 25);
}

std::uint16_t half_round(double x) {
    static const std::vector<double> positives = [] {
        std::vector<double> v;
        for (std::uint16_t p = 0; p < 0x7C00; ++p) v.push_back(half_value(p));
        return v;
    }();
    if (std::isnan(x)) return 0x7E00;
    const std::uint16_t sign = std::signbit(x) ? 0x8000 : 0;
    const double a = std::fabs(x);
    if (a >= 65520.0) return sign | 0x7C00;
    const auto hi = static_cast<std::size_t>(std::upper_bound(positives.begin(), positives.end(), a) - positives.begin());
    const std::size_t lo = hi - 1;
    std::size_t pick;
    if (hi == positives.size()) {
        pick = lo;
    } else {
        const double mid = (positives[lo] + positives[hi]) / 2.0;  // exact: both are short dyadics
        if (a < mid)
            pick = lo;
        else if (a > mid)
            pick = hi;
        else
            pick = lo % 2 == 0 ? lo : hi;
    }
    return static_cast<std::uint16_t>(sign | pick);
}

double Mlp64::loss(const std::vector<double>& x, const std::vector<std::size_t>& labels) const {
    const std::size_t batch = labels.size();
    std::vector<double> act = x;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t in = sizes[l];
        const std::size_t out = sizes[l + 1];
        std::vector<double> next(batch * out);
        for (std::size_t r = 0; r < batch; ++r) {
            for (std::size_t j = 0; j < out; ++j) {
                double z = biases[l][j];
                for (std::size_t i = 0; i < in; ++i) z += act[r * in + i] * weights[l][i * out + j];
                next[r * out + j] = (l + 2 < sizes.size()) ? std::max(z, 0.0) : z;
            }
        }
        act = std::move(next);
    }
    const std::size_t classes = sizes.back();
    double total = 0.0;
    for (std::size_t r = 0; r < batch; ++r) {
        const double* z = &act[r * classes];
        const double m = *std::max_element(z, z + classes);
        double s = 0.0;
        for (std::size_t j = 0; j < classes; ++j) s += std::exp(z[j] - m);
        total += std::log(s) + m - z[labels[r]];
    }
    return total / static_cast<double>(batch);
}

}  // namespace posittrain::oracle
