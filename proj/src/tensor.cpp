#include "posittrain/tensor.hpp"

#include <functional>
#include <numeric>
#include <stdexcept>

namespace posittrain {

std::string to_string(Accumulation mode) {
    return mode == Accumulation::RoundEachMac ? "round-mac" : "exact";
}

Accumulation parse_accumulation(const std::string& text) {
    if (text == "round-mac") return Accumulation::RoundEachMac;
    if (text == "exact") return Accumulation::ExactAccumulate;
    throw std::invalid_argument("unknown accumulation mode '" + text + "' (expected round-mac or exact)");
}

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_2d(const Tensor& t, const char* what) {
    if (t.shape().size() != 2) throw std::invalid_argument(std::string(what) + ": expected a 2-D tensor");
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, NumericFormat format)
    : shape_(std::move(shape)), format_(format), data_(element_count(shape_), 0) {}

Tensor::Tensor(std::vector<std::size_t> shape, NumericFormat format, std::vector<std::uint32_t> bits)
    : shape_(std::move(shape)), format_(format), data_(std::move(bits)) {
    if (data_.size() != element_count(shape_)) throw std::invalid_argument("tensor data does not match shape");
}

Tensor Tensor::from_doubles(std::vector<std::size_t> shape, NumericFormat format, std::span<const double> values) {
    std::vector<std::uint32_t> bits(values.size());
    with_arith(format, [&](const auto& ar) {
        for (std::size_t i = 0; i < values.size(); ++i) bits[i] = ar.from_double(values[i]);
    });
    return Tensor(std::move(shape), format, std::move(bits));
}

std::size_t Tensor::rows() const {
    require_2d(*this, "rows");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    require_2d(*this, "cols");
    return shape_[1];
}

double Tensor::value(std::size_t flat) const { return at(flat).to_double(); }

std::vector<double> Tensor::to_doubles() const {
    std::vector<double> out(data_.size());
    with_arith(format_, [&](const auto& ar) {
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = ar.to_double(data_[i]);
    });
    return out;
}

bool Tensor::has_non_finite() const {
    return with_arith(format_, [&](const auto& ar) {
        for (auto b : data_)
            if (ar.is_non_finite(b)) return true;
        return false;
    });
}

Tensor Tensor::transpose() const {
    const std::size_t r = rows();
    const std::size_t c = cols();
    std::vector<std::uint32_t> out(data_.size());
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j * r + i] = data_[i * c + j];
    return Tensor({c, r}, format_, std::move(out));
}

namespace {

// Dot product of two equally long bit spans with a fixed ascending order.
template <class Arith>
std::uint32_t dot_round_each(const Arith& ar, const std::uint32_t* x, const std::uint32_t* y, std::size_t k) {
    std::uint32_t acc = ar.zero();
    for (std::size_t i = 0; i < k; ++i) acc = ar.add(acc, ar.mul(x[i], y[i]));
    return acc;
}

template <class Arith>
std::uint32_t dot_exact(const Arith& ar, const std::uint32_t* x, const std::uint32_t* y, std::size_t k) {
    bool exceptional = false;
    for (std::size_t i = 0; i < k && !exceptional; ++i)
        exceptional = ar.is_non_finite(x[i]) || ar.is_non_finite(y[i]);
    if (exceptional) {
        // NaR/NaN/inf semantics follow binary64.
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += ar.to_double(x[i]) * ar.to_double(y[i]);
        return ar.from_double(sum);
    }
    ExactReal acc = ExactReal::zero();
    for (std::size_t i = 0; i < k; ++i) acc = exact_add(acc, exact_mul(ar.exact(x[i]), ar.exact(y[i])));
    return ar.round_exact(acc);
}

}  // namespace

Tensor matmul_lp(const Tensor& a, const Tensor& b, Accumulation mode) {
    require_2d(a, "matmul_lp");
    require_2d(b, "matmul_lp");
    if (!(a.format() == b.format())) throw std::invalid_argument("matmul_lp: operand formats differ");
    const std::size_t m = a.rows();
    const std::size_t k = a.cols();
    const std::size_t n = b.cols();
    if (b.rows() != k)
        throw std::invalid_argument("matmul_lp: inner dimensions disagree (" + std::to_string(k) + " vs " +
                                    std::to_string(b.rows()) + ")");

    const Tensor bt = b.transpose();
    std::vector<std::uint32_t> out(m * n);
    const std::uint32_t* pa = a.bits().data();
    const std::uint32_t* pb = bt.bits().data();
    with_arith(a.format(), [&](const auto& ar) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out[i * n + j] = mode == Accumulation::RoundEachMac ? dot_round_each(ar, pa + i * k, pb + j * k, k)
                                                                    : dot_exact(ar, pa + i * k, pb + j * k, k);
    });
    return Tensor({m, n}, a.format(), std::move(out));
}

Tensor add_row(const Tensor& a, const Tensor& row) {
    require_2d(a, "add_row");
    if (!(a.format() == row.format())) throw std::invalid_argument("add_row: formats differ");
    const std::size_t n = a.cols();
    if (row.size() != n) throw std::invalid_argument("add_row: row length does not match column count");
    std::vector<std::uint32_t> out(a.size());
    const auto src = a.bits();
    const auto r = row.bits();
    with_arith(a.format(), [&](const auto& ar) {
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = ar.add(src[i], r[i % n]);
    });
    return Tensor(a.shape(), a.format(), std::move(out));
}

Tensor column_sums(const Tensor& a, Accumulation mode) {
    require_2d(a, "column_sums");
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const Tensor t = a.transpose();
    std::vector<std::uint32_t> out(n);
    with_arith(a.format(), [&](const auto& ar) {
        const std::uint32_t one = ar.from_double(1.0);
        const std::vector<std::uint32_t> ones(m, one);
        for (std::size_t j = 0; j < n; ++j) {
            const std::uint32_t* col = t.bits().data() + j * m;
            if (mode == Accumulation::RoundEachMac) {
                std::uint32_t acc = ar.zero();
                for (std::size_t i = 0; i < m; ++i) acc = ar.add(acc, col[i]);
                out[j] = acc;
            } else {
                out[j] = dot_exact(ar, col, ones.data(), m);
            }
        }
    });
    return Tensor({1, n}, a.format(), std::move(out));
}

}  // namespace posittrain
