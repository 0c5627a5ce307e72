#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mgrnet/hsi.hpp"

namespace mgrnet {

// Spectrally separable toy dataset: each class has a distinct band-bump mean
// spectrum plus Gaussian noise; classes occupy vertical stripes.
struct SyntheticSpec {
    std::size_t height = 15;
    std::size_t width = 15;
    std::size_t bands = 8;
    std::size_t classes = 3;
    std::size_t labeled = 200;  // labeled pixels kept, remainder is background
    double noise_sigma = 0.05;
    std::uint64_t seed = 7;
};

std::pair<HsiCube, LabelRaster> make_synthetic(const SyntheticSpec& spec);

// Class mean spectrum used by the generator (exposed for oracle tests).
std::vector<double> synthetic_class_mean(const SyntheticSpec& spec, std::size_t class_id_1based);

}  // namespace mgrnet
