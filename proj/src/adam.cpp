#include "posittrain/adam.hpp"

namespace posittrain {

NonFiniteState::NonFiniteState(std::string where, std::size_t index, std::int64_t step)
    : std::runtime_error("non-finite value in " + where + " at index " + std::to_string(index) + " (step " +
                         std::to_string(step) + ")"),
      where_(std::move(where)),
      index_(index),
      step_(step) {}

AdamState AdamState::create(std::span<const Tensor* const> params, NumericFormat format,
                            const AdamHyperparameters& hyper) {
    AdamState s{format, {}, {}, 0, 0, 0, 0, 0};
    for (const Tensor* p : params) {
        s.m.emplace_back(p->shape(), format);
        s.v.emplace_back(p->shape(), format);
    }
    with_arith(format, [&](const auto& ar) {
        s.lr = ar.from_double(hyper.lr);
        s.beta1 = ar.from_double(hyper.beta1);
        s.beta2 = ar.from_double(hyper.beta2);
        s.eps = ar.from_double(hyper.eps);
    });
    return s;
}

namespace {

template <class Arith>
void check_finite(const Arith& ar, std::span<const std::uint32_t> values, const std::string& where,
                  std::int64_t step) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (ar.is_non_finite(values[i])) throw NonFiniteState(where, i, step);
}

}  // namespace

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient/state counts differ");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != state.m[i].shape())
            throw std::invalid_argument("adam_step: shape mismatch for parameter " + std::to_string(i));
        if (!(params[i]->format() == state.format) || !(grads[i]->format() == state.format))
            throw std::invalid_argument("adam_step: parameter " + std::to_string(i) + " is in the wrong format");
    }

    ++state.step;
    with_arith(state.format, [&](const auto& ar) {
        for (std::size_t i = 0; i < grads.size(); ++i)
            check_finite(ar, grads[i]->bits(), "gradient " + std::to_string(i), state.step);

        const std::uint32_t one = ar.from_double(1.0);
        const std::uint32_t one_minus_b1 = ar.sub(one, state.beta1);
        const std::uint32_t one_minus_b2 = ar.sub(one, state.beta2);
        const auto t = static_cast<double>(state.step);
        const std::uint32_t correction1 = ar.sub(one, pow_in(ar, state.beta1, t));
        const std::uint32_t correction2 = ar.sub(one, pow_in(ar, state.beta2, t));

        for (std::size_t i = 0; i < params.size(); ++i) {
            auto p = params[i]->mutable_bits();
            const auto g = grads[i]->bits();
            auto m = state.m[i].mutable_bits();
            auto v = state.v[i].mutable_bits();
            for (std::size_t j = 0; j < p.size(); ++j) {
                m[j] = ar.add(ar.mul(state.beta1, m[j]), ar.mul(one_minus_b1, g[j]));
                v[j] = ar.add(ar.mul(state.beta2, v[j]), ar.mul(one_minus_b2, ar.mul(g[j], g[j])));
                const std::uint32_t m_hat = ar.div(m[j], correction1);
                const std::uint32_t v_hat = ar.div(v[j], correction2);
                const std::uint32_t denom = ar.add(sqrt_in(ar, v_hat), state.eps);
                p[j] = ar.sub(p[j], ar.div(ar.mul(state.lr, m_hat), denom));
            }
            check_finite(ar, state.m[i].bits(), "first moment " + std::to_string(i), state.step);
            check_finite(ar, state.v[i].bits(), "second moment " + std::to_string(i), state.step);
            check_finite(ar, params[i]->bits(), "parameter " + std::to_string(i), state.step);
        }
    });
}

}  // namespace posittrain
