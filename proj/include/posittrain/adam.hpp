#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "posittrain/tensor.hpp"

namespace posittrain {

struct AdamHyperparameters {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;  // 1e-8 sits below the binary16 subnormal range
};

/// Moments and constants, all stored in the network format.
struct AdamState {
    NumericFormat format;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t step = 0;
    std::uint32_t lr;
    std::uint32_t beta1;
    std::uint32_t beta2;
    std::uint32_t eps;

    /// Zero moments shaped like `params`; hyperparameters rounded to `format`.
    static AdamState create(std::span<const Tensor* const> params, NumericFormat format,
                            const AdamHyperparameters& hyper = {});
};

/// Raised when a gradient, moment or parameter becomes NaR/NaN/inf.
class NonFiniteState : public std::runtime_error {
public:
    NonFiniteState(std::string where, std::size_t index, std::int64_t step);

    const std::string& where() const { return where_; }
    std::size_t index() const { return index_; }
    std::int64_t step() const { return step_; }

private:
    std::string where_;
    std::size_t index_;
    std::int64_t step_;
};

/// One in-format Adam update with bias correction:
///   m ← β₁m + (1−β₁)g,  v ← β₂v + (1−β₂)g²,
///   p ← p − lr·m̂ / (√v̂ + ε),  m̂ = m/(1−β₁ᵗ), v̂ = v/(1−β₂ᵗ).
/// Throws std::invalid_argument on shape mismatch and NonFiniteState when any
/// input gradient or updated value is non-finite.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state);

}  // namespace posittrain
