#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mgrnet/fusion.hpp"
#include "mgrnet/msconv.hpp"
#include "mgrnet/msgraph.hpp"

namespace mgrnet {

// FULL is the whole pipeline; NC/NG/NR drop one sub-module; G16/G36/G64 run
// a single graph scale whose pooled stream stands in for all three.
enum class AblationVariant { Full, NC, NG, NR, G16, G36, G64 };

inline const char* variant_name(AblationVariant v) {
    switch (v) {
        case AblationVariant::Full: return "FULL";
        case AblationVariant::NC: return "NC";
        case AblationVariant::NG: return "NG";
        case AblationVariant::NR: return "NR";
        case AblationVariant::G16: return "G16";
        case AblationVariant::G36: return "G36";
        case AblationVariant::G64: return "G64";
    }
    return "?";
}

inline AblationVariant parse_variant(const std::string& s) {
    for (AblationVariant v : {AblationVariant::Full, AblationVariant::NC, AblationVariant::NG,
                              AblationVariant::NR, AblationVariant::G16, AblationVariant::G36,
                              AblationVariant::G64})
        if (s == variant_name(v)) return v;
    throw_config("model", "unknown variant '" + s + "'");
}

struct ModelConfig {
    std::size_t classes = 0;
    std::size_t input_bands = 0;  // channels of the (PCA-reduced) patch
    std::size_t patch_size = 11;
    std::vector<std::size_t> conv_scales = {1, 3, 5};
    std::size_t conv_channels = 32;
    std::vector<std::size_t> graph_scales = {16, 36, 64};
    std::size_t graph_channels = 64;
    std::size_t residual_channels = 64;
    AblationVariant variant = AblationVariant::Full;
    std::uint64_t init_seed = 0;
};

// The assembled pipeline: multi-scale convolution over the input patch, the
// concatenated shallow features feed the graph scales, pooled graph streams
// cross-fuse into three residual streams, and the fused deep features are
// classified with softmax.
template <typename S>
struct MgrnetModelT {
    ModelConfig cfg;
    std::optional<MultiScaleConvT<S>> msconv;       // absent for NC
    std::vector<GraphScaleLayerT<S>> graph_layers;  // empty for NG, single for G*
    std::vector<ResidualBlockT<S>> residuals;       // one per stream; empty for NR
    std::vector<ConvScaleT<S>> plain_convs;         // NR replacement, one per stream
    ClassifierHeadT<S> head;

    static MgrnetModelT build(const ModelConfig& cfg);

    // patch [input_bands, p, p] -> probability vector [classes]
    TensorT<S> forward(const TensorT<S>& patch) const;

    std::vector<std::pair<std::string, TensorT<S>*>> named_params();
    std::vector<std::pair<std::string, const TensorT<S>*>> named_params() const;

    void attach(TapeT<S>& tape) {
        for (auto& [name, t] : named_params()) tape.watch(*t);
    }
    void detach() {
        for (auto& [name, t] : named_params()) t->detach();
    }

  private:
    std::size_t stream_channels() const;
};

template <typename S>
MgrnetModelT<S> MgrnetModelT<S>::build(const ModelConfig& cfg) {
    if (cfg.classes == 0) throw_config("model", "class count must be positive");
    if (cfg.input_bands == 0) throw_config("model", "input band count must be positive");
    MgrnetModelT<S> model;
    model.cfg = cfg;
    Rng rng(cfg.init_seed);

    const bool has_conv = cfg.variant != AblationVariant::NC;
    if (has_conv)
        model.msconv = MultiScaleConvT<S>::init(cfg.input_bands, cfg.conv_channels,
                                                cfg.conv_scales, rng);

    std::vector<std::size_t> graph_scales;
    switch (cfg.variant) {
        case AblationVariant::NG: break;
        case AblationVariant::G16: graph_scales = {16}; break;
        case AblationVariant::G36: graph_scales = {36}; break;
        case AblationVariant::G64: graph_scales = {64}; break;
        default: graph_scales = cfg.graph_scales;
    }
    const std::size_t graph_in =
        has_conv ? cfg.conv_channels * cfg.conv_scales.size() : cfg.input_bands;
    for (std::size_t nodes : graph_scales)
        model.graph_layers.push_back(
            GraphScaleLayerT<S>::init(nodes, graph_in, cfg.graph_channels, rng));

    const std::size_t fused_channels = 2 * model.stream_channels();
    for (int i = 0; i < 3; ++i) {
        if (cfg.variant == AblationVariant::NR)
            model.plain_convs.push_back(
                ConvScaleT<S>::init(fused_channels, cfg.residual_channels, 3, rng));
        else
            model.residuals.push_back(
                ResidualBlockT<S>::init(fused_channels, cfg.residual_channels, rng));
    }

    model.head = ClassifierHeadT<S>::init(3 * cfg.residual_channels * 16, cfg.classes, rng);
    return model;
}

template <typename S>
std::size_t MgrnetModelT<S>::stream_channels() const {
    if (cfg.variant == AblationVariant::NG) return cfg.conv_channels;
    return cfg.graph_channels;
}

template <typename S>
TensorT<S> MgrnetModelT<S>::forward(const TensorT<S>& patch) const {
    if (patch.rank() != 3 || patch.shape[0] != cfg.input_bands)
        throw_structural("model", "patch " + shape_str(patch.shape) + " does not match config");

    std::vector<TensorT<S>> streams;  // three pooled [16, C] streams
    if (cfg.variant == AblationVariant::NG) {
        const GraphScaleSpec grid16(16);
        for (const auto& out : multiscale_conv_forward(patch, *msconv))
            streams.push_back(build_grid_nodes(out, grid16));
    } else {
        TensorT<S> base;
        if (msconv) {
            auto conv_outs = multiscale_conv_forward(patch, *msconv);
            base = concat_channels(std::span<const TensorT<S>>(conv_outs));
        } else {
            base = patch;
        }
        for (const auto& layer : graph_layers) {
            TensorT<S> nodes = build_grid_nodes(base, layer.spec);
            streams.push_back(pool_nodes(graph_conv_forward(nodes, layer)));
        }
        while (streams.size() < 3) streams.push_back(streams.front());
    }

    auto fused = cross_fuse(streams[0], streams[1], streams[2]);
    std::vector<TensorT<S>> deep;
    for (int i = 0; i < 3; ++i) {
        if (cfg.variant == AblationVariant::NR)
            deep.push_back(conv_layer_forward(fused[static_cast<std::size_t>(i)],
                                              plain_convs[static_cast<std::size_t>(i)]));
        else
            deep.push_back(residual_block_forward(fused[static_cast<std::size_t>(i)],
                                                  residuals[static_cast<std::size_t>(i)]));
    }
    return classify_head(final_fuse(deep[0], deep[1], deep[2]), head);
}

template <typename S>
std::vector<std::pair<std::string, TensorT<S>*>> MgrnetModelT<S>::named_params() {
    std::vector<std::pair<std::string, TensorT<S>*>> out;
    if (msconv)
        for (auto& scale : msconv->scales) {
            const std::string base = "msconv.k" + std::to_string(scale.kernel_extent);
            out.push_back({base + ".weight", &scale.weight});
            out.push_back({base + ".bias", &scale.bias});
        }
    for (auto& layer : graph_layers) {
        const std::string base = "msgraph.k" + std::to_string(layer.spec.node_count);
        out.push_back({base + ".weight", &layer.weight});
        out.push_back({base + ".bias", &layer.bias});
    }
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        const std::string base = "fuse.res" + std::to_string(i + 1);
        out.push_back({base + ".conv1.weight", &residuals[i].conv1_weight});
        out.push_back({base + ".conv1.bias", &residuals[i].conv1_bias});
        out.push_back({base + ".conv2.weight", &residuals[i].conv2_weight});
        out.push_back({base + ".conv2.bias", &residuals[i].conv2_bias});
        out.push_back({base + ".proj.weight", &residuals[i].proj_weight});
        out.push_back({base + ".proj.bias", &residuals[i].proj_bias});
    }
    for (std::size_t i = 0; i < plain_convs.size(); ++i) {
        const std::string base = "fuse.res" + std::to_string(i + 1) + ".conv1";
        out.push_back({base + ".weight", &plain_convs[i].weight});
        out.push_back({base + ".bias", &plain_convs[i].bias});
    }
    out.push_back({"head.weight", &head.weight});
    out.push_back({"head.bias", &head.bias});
    return out;
}

template <typename S>
std::vector<std::pair<std::string, const TensorT<S>*>> MgrnetModelT<S>::named_params() const {
    auto mutable_params = const_cast<MgrnetModelT<S>*>(this)->named_params();
    std::vector<std::pair<std::string, const TensorT<S>*>> out;
    out.reserve(mutable_params.size());
    for (auto& [name, t] : mutable_params) out.push_back({name, t});
    return out;
}

using MgrnetModel = MgrnetModelT<float>;

}  // namespace mgrnet
