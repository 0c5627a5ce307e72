#pragma once

#include <cstdint>
#include <string>

namespace mgrnet {

// Full experiment parameterization. Values resolve as defaults, then the
// `key = value` config file, then command-line flags; unknown keys in the
// file are rejected rather than ignored.
struct ExperimentConfig {
    std::string dataset;      // preset name ("indian_pines", ...) or free label
    std::string cube_path;    // HSIC container
    std::string labels_path;  // HSIL container
    std::string out_dir = "out";

    double pca_variance_target = 0.9999;
    std::size_t pca_cap = 0;  // 0 = use the preset cap when the dataset has one

    std::size_t patch_size = 11;
    double train_fraction = 0.2;
    std::string variant = "FULL";

    std::size_t epochs = 500;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::size_t eval_every = 10;
    std::uint64_t seed = 0;

    std::size_t conv_channels = 32;
    std::size_t graph_channels = 64;
    std::size_t residual_channels = 64;
};

// Applies one key/value pair; throws a config error for unknown keys or
// unparsable values. Shared by the file parser and flag overrides.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Parses a flat `key = value` file with '#' comments.
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace mgrnet
