#pragma once

#include <cmath>
#include <vector>

#include "mgrnet/msconv.hpp"
#include "mgrnet/tensor.hpp"

namespace mgrnet {

// A graph scale is a square node grid (16 -> 4x4, 36 -> 6x6, 64 -> 8x8) with
// 8-connected adjacency plus a self-loop.
struct GraphScaleSpec {
    std::size_t node_count;

    explicit GraphScaleSpec(std::size_t nodes) : node_count(nodes) {
        const auto g = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(nodes))));
        if (g * g != nodes) throw_config("msgraph", "node count must be a perfect square");
        grid = g;
    }
    std::size_t grid = 0;
};

// Row-normalized coefficients: a[i][j] = 1/deg(i) for j in N(i) (incl. i).
template <typename S>
TensorT<S> build_adjacency(const GraphScaleSpec& spec) {
    const std::size_t g = spec.grid;
    const std::size_t n = spec.node_count;
    TensorT<S> adj(Shape{n, n});
    for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t c = 0; c < g; ++c) {
            const std::size_t i = r * g + c;
            std::vector<std::size_t> neigh;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const auto nr = static_cast<std::ptrdiff_t>(r) + dr;
                    const auto nc = static_cast<std::ptrdiff_t>(c) + dc;
                    if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(g) ||
                        nc >= static_cast<std::ptrdiff_t>(g))
                        continue;
                    neigh.push_back(static_cast<std::size_t>(nr) * g + static_cast<std::size_t>(nc));
                }
            const S coeff = S(1) / static_cast<S>(neigh.size());
            for (std::size_t j : neigh) adj.data[i * n + j] = coeff;
        }
    }
    return adj;
}

// Learned per-scale channel transform over the fixed normalized adjacency.
template <typename S>
struct GraphScaleLayerT {
    GraphScaleSpec spec{16};
    TensorT<S> adjacency;  // constant, never on tape
    TensorT<S> weight;     // [c_in, c_out]
    TensorT<S> bias;       // [c_out]

    static GraphScaleLayerT init(std::size_t nodes, std::size_t c_in, std::size_t c_out, Rng& rng) {
        GraphScaleLayerT layer;
        layer.spec = GraphScaleSpec(nodes);
        layer.adjacency = build_adjacency<S>(layer.spec);
        layer.weight = TensorT<S>(Shape{c_in, c_out});
        layer.bias = TensorT<S>(Shape{c_out});
        glorot_fill(layer.weight, rng, c_in, c_out);
        return layer;
    }
};

// Pools a [C, p, p] feature map to the scale's grid and flattens it
// row-major into node rows: [node_count, C].
template <typename S>
TensorT<S> build_grid_nodes(const TensorT<S>& features, const GraphScaleSpec& spec) {
    if (features.rank() != 3 || features.shape[1] != features.shape[2])
        throw_structural("msgraph", "expects [C,p,p] features, got " + shape_str(features.shape));
    if (spec.grid > features.shape[1])
        throw_config("msgraph", "graph grid " + std::to_string(spec.grid) +
                                    " exceeds spatial extent " + std::to_string(features.shape[1]));
    const std::size_t c = features.shape[0];
    TensorT<S> pooled = adaptive_avg_pool(features, spec.grid);            // [C, g, g]
    TensorT<S> flat = reshape(pooled, Shape{c, spec.node_count});          // [C, g*g]
    return transpose2d(flat);                                              // [nodes, C]
}

// g_i = ReLU(sum_{j in N(i)} a_ij (f(j) W) + b)
template <typename S>
TensorT<S> graph_conv_forward(const TensorT<S>& nodes, const GraphScaleLayerT<S>& layer) {
    if (nodes.rank() != 2 || nodes.shape[0] != layer.spec.node_count)
        throw_structural("msgraph", "node features " + shape_str(nodes.shape) +
                                        " do not match scale " +
                                        std::to_string(layer.spec.node_count));
    if (nodes.shape[1] != layer.weight.shape[0])
        throw_structural("msgraph", "channel count " + std::to_string(nodes.shape[1]) +
                                        " does not match transform " + shape_str(layer.weight.shape));
    TensorT<S> transformed = matmul(nodes, layer.weight);        // [n, c_out]
    TensorT<S> aggregated = matmul(layer.adjacency, transformed);  // [n, c_out]
    return relu(add_rows(aggregated, layer.bias));
}

// Average-pools a node grid down to 16 nodes (4x4); identity at 16.
template <typename S>
TensorT<S> pool_nodes(const TensorT<S>& nodes) {
    if (nodes.rank() != 2) throw_structural("msgraph", "expects [nodes, C]");
    const std::size_t n = nodes.shape[0];
    const auto g = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    if (g * g != n) throw_structural("msgraph", "node count is not a perfect square");
    if (g < 4) throw_config("msgraph", "node grid smaller than 4x4 cannot pool to 16");
    if (n == 16) return nodes;
    const std::size_t c = nodes.shape[1];
    TensorT<S> grid = reshape(transpose2d(nodes), Shape{c, g, g});  // [C, g, g]
    TensorT<S> pooled = adaptive_avg_pool(grid, 4);                 // [C, 4, 4]
    return transpose2d(reshape(pooled, Shape{c, std::size_t{16}}));
}

}  // namespace mgrnet
