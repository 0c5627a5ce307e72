#include "mgrnet/synthetic.hpp"

#include <algorithm>

#include "mgrnet/errors.hpp"
#include "mgrnet/rng.hpp"

namespace mgrnet {

std::vector<double> synthetic_class_mean(const SyntheticSpec& spec, std::size_t class_id_1based) {
    // Class c gets a high-reflectance bump over its own band segment.
    std::vector<double> mean(spec.bands, 0.2);
    if (class_id_1based == 0) return std::vector<double>(spec.bands, 0.5);  // background
    const std::size_t seg = std::max<std::size_t>(1, spec.bands / spec.classes);
    const std::size_t lo = (class_id_1based - 1) * seg;
    const std::size_t hi = class_id_1based == spec.classes ? spec.bands : lo + seg;
    for (std::size_t b = lo; b < hi && b < spec.bands; ++b) mean[b] = 1.0;
    return mean;
}

std::pair<HsiCube, LabelRaster> make_synthetic(const SyntheticSpec& spec) {
    if (spec.classes == 0 || spec.bands < spec.classes)
        throw_config("synthetic", "needs at least one band per class");
    if (spec.labeled > spec.height * spec.width)
        throw_config("synthetic", "labeled count exceeds pixel count");

    LabelRaster labels;
    labels.height = spec.height;
    labels.width = spec.width;
    labels.num_classes = spec.classes;
    labels.labels.assign(spec.height * spec.width, 0);

    // Vertical stripes, trimmed to the labeled quota per class.
    std::vector<std::size_t> quota(spec.classes, spec.labeled / spec.classes);
    for (std::size_t c = 0; c < spec.labeled % spec.classes; ++c) ++quota[c];
    for (std::size_t y = 0; y < spec.height; ++y)
        for (std::size_t x = 0; x < spec.width; ++x) {
            const std::size_t c = std::min(spec.classes - 1, x * spec.classes / spec.width);
            if (quota[c] == 0) continue;
            --quota[c];
            labels.labels[y * spec.width + x] = static_cast<std::uint16_t>(c + 1);
        }

    HsiCube cube;
    cube.height = spec.height;
    cube.width = spec.width;
    cube.bands = spec.bands;
    cube.values.resize(spec.height * spec.width * spec.bands);

    std::vector<std::vector<double>> means(spec.classes + 1);
    for (std::size_t c = 0; c <= spec.classes; ++c) means[c] = synthetic_class_mean(spec, c);

    Rng rng(spec.seed);
    const std::size_t plane = cube.pixels();
    for (std::size_t px = 0; px < plane; ++px) {
        const std::size_t c = labels.labels[px];
        for (std::size_t b = 0; b < spec.bands; ++b)
            cube.values[b * plane + px] =
                static_cast<float>(means[c][b] + spec.noise_sigma * rng.normal());
    }
    return {std::move(cube), std::move(labels)};
}

}  // namespace mgrnet
