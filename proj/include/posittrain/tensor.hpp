#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "posittrain/arith.hpp"
#include "posittrain/numeric_format.hpp"

namespace posittrain {

enum class Accumulation : std::uint8_t {
    RoundEachMac,     // round every product and every partial sum, index order
    ExactAccumulate,  // exact sum of exact products, one final rounding
};

std::string to_string(Accumulation mode);
Accumulation parse_accumulation(const std::string& text);

/// Row-major tensor of format-tagged bit patterns.
class Tensor {
public:
    Tensor(std::vector<std::size_t> shape, NumericFormat format);  // zero-filled
    Tensor(std::vector<std::size_t> shape, NumericFormat format, std::vector<std::uint32_t> bits);

    /// Rounds each value to the format.
    static Tensor from_doubles(std::vector<std::size_t> shape, NumericFormat format, std::span<const double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    const NumericFormat& format() const { return format_; }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const;  // 2-D only
    std::size_t cols() const;  // 2-D only

    std::span<const std::uint32_t> bits() const { return data_; }
    std::span<std::uint32_t> mutable_bits() { return data_; }

    Scalar at(std::size_t flat) const { return Scalar{format_, data_.at(flat)}; }
    double value(std::size_t flat) const;
    double value(std::size_t row, std::size_t col) const { return value(row * cols() + col); }
    std::vector<double> to_doubles() const;

    bool has_non_finite() const;
    Tensor transpose() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::vector<std::size_t> shape_;
    NumericFormat format_;
    std::vector<std::uint32_t> data_;
};

/// [m×k] · [k×n]. Throws std::invalid_argument on shape or format mismatch.
Tensor matmul_lp(const Tensor& a, const Tensor& b, Accumulation mode = Accumulation::RoundEachMac);

/// Adds a [1×n] (or [n]) row to every row of an [m×n] tensor.
Tensor add_row(const Tensor& a, const Tensor& row);
/// Column sums of an [m×n] tensor in ascending row order, as [1×n].
Tensor column_sums(const Tensor& a, Accumulation mode = Accumulation::RoundEachMac);

}  // namespace posittrain
