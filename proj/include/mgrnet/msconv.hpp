#pragma once

#include <cmath>
#include <vector>

#include "mgrnet/rng.hpp"
#include "mgrnet/tensor.hpp"

namespace mgrnet {

// Uniform Glorot init: U(-sqrt(6/(fan_in+fan_out)), +...), biases zero.
template <typename S>
void glorot_fill(TensorT<S>& t, Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.data) v = static_cast<S>(rng.uniform(-bound, bound));
}

// One convolution scale: kernel [n_out, c_in, k, k] + bias, ReLU activation.
template <typename S>
struct ConvScaleT {
    std::size_t kernel_extent = 0;
    TensorT<S> weight;
    TensorT<S> bias;

    static ConvScaleT init(std::size_t c_in, std::size_t n_out, std::size_t k, Rng& rng) {
        ConvScaleT layer;
        layer.kernel_extent = k;
        layer.weight = TensorT<S>(Shape{n_out, c_in, k, k});
        layer.bias = TensorT<S>(Shape{n_out});
        glorot_fill(layer.weight, rng, c_in * k * k, n_out * k * k);
        return layer;
    }
};

// Per-scale kernels applied to the same input; scales never mix here.
template <typename S>
struct MultiScaleConvT {
    std::vector<ConvScaleT<S>> scales;  // ascending kernel extent

    static MultiScaleConvT init(std::size_t c_in, std::size_t n_out,
                                const std::vector<std::size_t>& kernel_extents, Rng& rng) {
        if (kernel_extents.empty()) throw_config("msconv", "kernel scale set must be non-empty");
        MultiScaleConvT layer;
        for (std::size_t k : kernel_extents)
            layer.scales.push_back(ConvScaleT<S>::init(c_in, n_out, k, rng));
        return layer;
    }
};

// ReLU(conv2d(x, W, b)) with `same` padding: spatial extents preserved.
template <typename S>
TensorT<S> conv_layer_forward(const TensorT<S>& x, const ConvScaleT<S>& scale) {
    return relu(conv2d(x, scale.weight, scale.bias, Padding::Same));
}

// Applies every scale independently; outputs ordered by ascending extent.
template <typename S>
std::vector<TensorT<S>> multiscale_conv_forward(const TensorT<S>& x,
                                                const MultiScaleConvT<S>& layer) {
    if (layer.scales.empty()) throw_config("msconv", "kernel scale set must be non-empty");
    std::vector<TensorT<S>> outs;
    outs.reserve(layer.scales.size());
    for (const auto& scale : layer.scales) outs.push_back(conv_layer_forward(x, scale));
    return outs;
}

}  // namespace mgrnet
