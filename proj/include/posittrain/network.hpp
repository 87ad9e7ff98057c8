#pragma once

// Dense feed-forward networks whose parameters, activations and gradients all
// live in one NumericFormat.

#include <cstdint>
#include <vector>

#include "posittrain/tensor.hpp"

namespace posittrain {

enum class Activation : std::uint8_t { ReLU, Identity };

struct DenseLayer {
    Tensor weights;  // [in × out]
    Tensor bias;     // [1 × out]
    Activation activation = Activation::ReLU;

    std::size_t inputs() const { return weights.rows(); }
    std::size_t outputs() const { return weights.cols(); }
};

class Network {
public:
    /// Throws std::invalid_argument unless layer shapes chain and share `format`.
    Network(NumericFormat format, std::vector<DenseLayer> layers);

    /// He-uniform weights drawn in binary64 (limit sqrt(6 / fan_in)) and
    /// rounded to the format; zero biases. `sizes` lists every layer width,
    /// input first. Hidden layers use ReLU, the last layer is linear.
    static Network he_uniform(NumericFormat format, const std::vector<std::size_t>& sizes, std::uint64_t seed);

    const NumericFormat& format() const { return format_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    std::size_t input_size() const { return layers_.front().inputs(); }
    std::size_t output_size() const { return layers_.back().outputs(); }
    std::size_t parameter_count() const;

    /// Parameters in update order: W0, b0, W1, b1, ...
    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;

private:
    NumericFormat format_;
    std::vector<DenseLayer> layers_;
};

struct ForwardCache {
    std::vector<Tensor> inputs;          // input of each layer
    std::vector<Tensor> pre_activation;  // z of each layer
};

struct ForwardResult {
    Tensor logits;
    ForwardCache cache;
};

/// x: [batch × inputs] already in the network format.
ForwardResult forward(const Network& net, const Tensor& x, Accumulation mode = Accumulation::RoundEachMac);

struct LossResult {
    Scalar loss;     // mean cross-entropy over the batch
    Tensor dlogits;  // (softmax − label) / batch
};

/// Row-max-stabilized softmax cross-entropy computed in the logits' format.
/// `labels` is one-hot in the same format.
LossResult softmax_xent(const Tensor& logits, const Tensor& labels);
/// Softmax probabilities only.
Tensor softmax(const Tensor& logits);

struct LayerGradients {
    Tensor weights;
    Tensor bias;
};

std::vector<LayerGradients> backward(const Network& net, const ForwardCache& cache, const Tensor& dlogits,
                                     Accumulation mode = Accumulation::RoundEachMac);

/// Index of the largest logit per row (first wins on ties).
std::vector<std::size_t> argmax_rows(const Tensor& logits);

}  // namespace posittrain
