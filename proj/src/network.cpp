#include "posittrain/network.hpp"

#include <cmath>
#include <stdexcept>

#include "posittrain/rng.hpp"

namespace posittrain {

Network::Network(NumericFormat format, std::vector<DenseLayer> layers) : format_(format), layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& layer = layers_[i];
        if (!(layer.weights.format() == format_) || !(layer.bias.format() == format_))
            throw std::invalid_argument("layer " + std::to_string(i) + " is not stored in " + format_.name());
        if (layer.bias.size() != layer.outputs())
            throw std::invalid_argument("layer " + std::to_string(i) + " bias length mismatch");
        if (i > 0 && layers_[i - 1].outputs() != layer.inputs())
            throw std::invalid_argument("layer " + std::to_string(i) + " does not chain with its predecessor");
    }
}

Network Network::he_uniform(NumericFormat format, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("network needs an input and an output size");
    std::vector<DenseLayer> layers;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const std::size_t fan_in = sizes[l];
        const std::size_t fan_out = sizes[l + 1];
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        const auto rng = CounterRng::derive(seed, Stream::WeightInit, l);
        std::vector<double> w(fan_in * fan_out);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = (2.0 * rng.uniform(i) - 1.0) * limit;
        const bool last = l + 2 == sizes.size();
        layers.push_back(DenseLayer{Tensor::from_doubles({fan_in, fan_out}, format, w),
                                    Tensor({1, fan_out}, format),
                                    last ? Activation::Identity : Activation::ReLU});
    }
    return Network(format, std::move(layers));
}

std::size_t Network::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) count += layer.weights.size() + layer.bias.size();
    return count;
}

std::vector<Tensor*> Network::parameters() {
    std::vector<Tensor*> out;
    for (auto& layer : layers_) {
        out.push_back(&layer.weights);
        out.push_back(&layer.bias);
    }
    return out;
}

std::vector<const Tensor*> Network::parameters() const {
    std::vector<const Tensor*> out;
    for (const auto& layer : layers_) {
        out.push_back(&layer.weights);
        out.push_back(&layer.bias);
    }
    return out;
}

namespace {

template <class Arith>
bool passes_relu(const Arith& ar, std::uint32_t z) {
    return ar.is_positive(z) || std::isnan(ar.to_double(z));
}

Tensor relu(const Tensor& z) {
    std::vector<std::uint32_t> out(z.size());
    const auto in = z.bits();
    with_arith(z.format(), [&](const auto& ar) {
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = passes_relu(ar, in[i]) ? in[i] : ar.zero();
    });
    return Tensor(z.shape(), z.format(), std::move(out));
}

// Zeroes grad entries where the ReLU was inactive.
Tensor relu_backward(const Tensor& grad, const Tensor& z) {
    std::vector<std::uint32_t> out(grad.size());
    const auto g = grad.bits();
    const auto in = z.bits();
    with_arith(z.format(), [&](const auto& ar) {
        for (std::size_t i = 0; i < g.size(); ++i) out[i] = passes_relu(ar, in[i]) ? g[i] : ar.zero();
    });
    return Tensor(grad.shape(), grad.format(), std::move(out));
}

}  // namespace

ForwardResult forward(const Network& net, const Tensor& x, Accumulation mode) {
    if (x.shape().size() != 2 || x.cols() != net.input_size())
        throw std::invalid_argument("forward: input must be [batch × " + std::to_string(net.input_size()) + "]");
    if (!(x.format() == net.format())) throw std::invalid_argument("forward: input is not in the network format");

    ForwardCache cache;
    Tensor a = x;
    for (const auto& layer : net.layers()) {
        Tensor z = add_row(matmul_lp(a, layer.weights, mode), layer.bias);
        cache.inputs.push_back(std::move(a));
        a = layer.activation == Activation::ReLU ? relu(z) : z;
        cache.pre_activation.push_back(std::move(z));
    }
    return ForwardResult{std::move(a), std::move(cache)};
}

namespace {

struct SoftmaxRows {
    std::vector<std::uint32_t> probs;
    std::vector<std::uint32_t> shifted;   // z − rowmax
    std::vector<std::uint32_t> log_sums;  // log of each row's exp sum
};

template <class Arith>
SoftmaxRows softmax_rows(const Arith& ar, const Tensor& logits) {
    const std::size_t rows = logits.rows();
    const std::size_t cols = logits.cols();
    const auto z = logits.bits();
    SoftmaxRows out{std::vector<std::uint32_t>(z.size()), std::vector<std::uint32_t>(z.size()),
                    std::vector<std::uint32_t>(rows)};
    std::vector<std::uint32_t> e(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::uint32_t* row = z.data() + r * cols;
        std::size_t best = 0;
        for (std::size_t j = 1; j < cols; ++j)
            if (ar.to_double(row[j]) > ar.to_double(row[best])) best = j;
        std::uint32_t sum = ar.zero();
        for (std::size_t j = 0; j < cols; ++j) {
            out.shifted[r * cols + j] = ar.sub(row[j], row[best]);
            e[j] = exp_in(ar, out.shifted[r * cols + j]);
            sum = ar.add(sum, e[j]);
        }
        for (std::size_t j = 0; j < cols; ++j) out.probs[r * cols + j] = ar.div(e[j], sum);
        out.log_sums[r] = log_in(ar, sum);
    }
    return out;
}

}  // namespace

Tensor softmax(const Tensor& logits) {
    auto probs = with_arith(logits.format(), [&](const auto& ar) { return softmax_rows(ar, logits).probs; });
    return Tensor(logits.shape(), logits.format(), std::move(probs));
}

LossResult softmax_xent(const Tensor& logits, const Tensor& labels) {
    if (logits.shape() != labels.shape()) throw std::invalid_argument("softmax_xent: logits/labels shape mismatch");
    if (!(logits.format() == labels.format())) throw std::invalid_argument("softmax_xent: formats differ");
    const std::size_t rows = logits.rows();
    const std::size_t cols = logits.cols();
    const auto y = labels.bits();
    std::vector<std::uint32_t> grad(logits.size());
    const std::uint32_t loss = with_arith(logits.format(), [&](const auto& ar) {
        const SoftmaxRows sm = softmax_rows(ar, logits);
        const std::uint32_t batch = ar.from_double(static_cast<double>(rows));
        std::uint32_t total = ar.zero();
        for (std::size_t r = 0; r < rows; ++r) {
            // log-sum-exp minus the label-weighted shifted logit
            std::uint32_t target = ar.zero();
            for (std::size_t j = 0; j < cols; ++j)
                target = ar.add(target, ar.mul(y[r * cols + j], sm.shifted[r * cols + j]));
            total = ar.add(total, ar.sub(sm.log_sums[r], target));
        }
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = ar.div(ar.sub(sm.probs[i], y[i]), batch);
        return ar.div(total, batch);
    });
    return LossResult{Scalar{logits.format(), loss}, Tensor(logits.shape(), logits.format(), std::move(grad))};
}

std::vector<LayerGradients> backward(const Network& net, const ForwardCache& cache, const Tensor& dlogits,
                                     Accumulation mode) {
    const auto& layers = net.layers();
    if (cache.inputs.size() != layers.size() || cache.pre_activation.size() != layers.size())
        throw std::invalid_argument("backward: cache does not match the network");
    if (dlogits.shape() != cache.pre_activation.back().shape())
        throw std::invalid_argument("backward: dlogits shape mismatch");

    std::vector<LayerGradients> grads(layers.size(), LayerGradients{dlogits, dlogits});
    Tensor dz = dlogits;
    for (std::size_t l = layers.size(); l-- > 0;) {
        grads[l].weights = matmul_lp(cache.inputs[l].transpose(), dz, mode);
        grads[l].bias = column_sums(dz, mode);
        if (l == 0) break;
        Tensor da = matmul_lp(dz, layers[l].weights.transpose(), mode);
        dz = layers[l - 1].activation == Activation::ReLU ? relu_backward(da, cache.pre_activation[l - 1])
                                                          : std::move(da);
    }
    return grads;
}

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
    const std::size_t rows = logits.rows();
    const std::size_t cols = logits.cols();
    const std::vector<double> v = logits.to_doubles();
    std::vector<std::size_t> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < cols; ++j)
            if (v[r * cols + j] > v[r * cols + best]) best = j;
        out[r] = best;
    }
    return out;
}

}  // namespace posittrain
