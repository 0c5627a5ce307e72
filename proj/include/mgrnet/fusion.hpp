#pragma once

#include <array>
#include <vector>

#include "mgrnet/msconv.hpp"
#include "mgrnet/tensor.hpp"

namespace mgrnet {

// Reshapes pooled node features [16, C] onto the 4x4 grid as [C, 4, 4].
template <typename S>
TensorT<S> nodes_to_grid(const TensorT<S>& nodes) {
    if (nodes.rank() != 2 || nodes.shape[0] != 16)
        throw_structural("fusion", "expects [16, C] pooled nodes, got " + shape_str(nodes.shape));
    return reshape(transpose2d(nodes), Shape{nodes.shape[1], std::size_t{4}, std::size_t{4}});
}

// Pairwise cross fusion: Out1 = (s1|s2), Out2 = (s1|s3), Out3 = (s2|s3),
// each on the 4x4 grid with doubled channels.
template <typename S>
std::array<TensorT<S>, 3> cross_fuse(const TensorT<S>& s1, const TensorT<S>& s2,
                                     const TensorT<S>& s3) {
    if (s1.shape != s2.shape || s1.shape != s3.shape)
        throw_structural("fusion", "pooled streams must share node count and channels");
    TensorT<S> g1 = nodes_to_grid(s1), g2 = nodes_to_grid(s2), g3 = nodes_to_grid(s3);
    const std::vector<TensorT<S>> p12{g1, g2}, p13{g1, g3}, p23{g2, g3};
    return {concat_channels(std::span<const TensorT<S>>(p12)),
            concat_channels(std::span<const TensorT<S>>(p13)),
            concat_channels(std::span<const TensorT<S>>(p23))};
}

// y = ReLU(F(x) + proj(x)) with F = conv3x3 -> ReLU -> conv3x3 and a 1x1
// projection that is always applied.
template <typename S>
struct ResidualBlockT {
    TensorT<S> conv1_weight, conv1_bias;  // [D, C, 3, 3]
    TensorT<S> conv2_weight, conv2_bias;  // [D, D, 3, 3]
    TensorT<S> proj_weight, proj_bias;    // [D, C, 1, 1]

    static ResidualBlockT init(std::size_t c_in, std::size_t c_out, Rng& rng) {
        ResidualBlockT b;
        b.conv1_weight = TensorT<S>(Shape{c_out, c_in, 3, 3});
        b.conv1_bias = TensorT<S>(Shape{c_out});
        b.conv2_weight = TensorT<S>(Shape{c_out, c_out, 3, 3});
        b.conv2_bias = TensorT<S>(Shape{c_out});
        b.proj_weight = TensorT<S>(Shape{c_out, c_in, 1, 1});
        b.proj_bias = TensorT<S>(Shape{c_out});
        glorot_fill(b.conv1_weight, rng, c_in * 9, c_out * 9);
        glorot_fill(b.conv2_weight, rng, c_out * 9, c_out * 9);
        glorot_fill(b.proj_weight, rng, c_in, c_out);
        return b;
    }
};

template <typename S>
TensorT<S> residual_block_forward(const TensorT<S>& x, const ResidualBlockT<S>& block) {
    TensorT<S> f = relu(conv2d(x, block.conv1_weight, block.conv1_bias, Padding::Same));
    f = conv2d(f, block.conv2_weight, block.conv2_bias, Padding::Same);
    TensorT<S> skip = conv2d(x, block.proj_weight, block.proj_bias, Padding::Same);
    return relu(add(f, skip));
}

// Channel concatenation of the three deep streams, in order.
template <typename S>
TensorT<S> final_fuse(const TensorT<S>& f1, const TensorT<S>& f2, const TensorT<S>& f3) {
    if (f1.shape != f2.shape || f1.shape != f3.shape)
        throw_structural("fusion", "deep streams must share shapes");
    const std::vector<TensorT<S>> parts{f1, f2, f3};
    return concat_channels(std::span<const TensorT<S>>(parts));
}

// Flatten -> affine -> stable softmax.
template <typename S>
struct ClassifierHeadT {
    TensorT<S> weight;  // [classes, features]
    TensorT<S> bias;    // [classes]

    static ClassifierHeadT init(std::size_t features, std::size_t classes, Rng& rng) {
        ClassifierHeadT h;
        h.weight = TensorT<S>(Shape{classes, features});
        h.bias = TensorT<S>(Shape{classes});
        glorot_fill(h.weight, rng, features, classes);
        return h;
    }
};

template <typename S>
TensorT<S> classify_head(const TensorT<S>& fused, const ClassifierHeadT<S>& head) {
    if (fused.size() != head.weight.shape[1])
        throw_structural("fusion", "fused features " + shape_str(fused.shape) +
                                       " do not match head input " +
                                       std::to_string(head.weight.shape[1]));
    TensorT<S> flat = reshape(fused, Shape{fused.size()});
    return softmax(affine(head.weight, flat, head.bias));
}

}  // namespace mgrnet
