#include "mgrnet/patches.hpp"

#include <algorithm>
#include <cmath>

#include "mgrnet/errors.hpp"
#include "mgrnet/rng.hpp"

namespace mgrnet {

namespace {

// Reflect out-of-range indices without duplicating the border
// (-1 -> 1, -2 -> 2, H -> H-2, ...).
std::size_t mirror(std::ptrdiff_t i, std::size_t extent) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(extent);
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

}  // namespace

Tensor PatchSet::patch(std::size_t i) const {
    const auto [cy, cx] = coords_[i];
    const std::size_t p = patch_size_;
    const std::size_t d = cube_->bands;
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(p / 2);
    Tensor out(Shape{d, p, p});
    const std::size_t plane = cube_->pixels();
    for (std::size_t dy = 0; dy < p; ++dy) {
        const std::size_t sy =
            mirror(static_cast<std::ptrdiff_t>(cy) + static_cast<std::ptrdiff_t>(dy) - half,
                   cube_->height);
        for (std::size_t dx = 0; dx < p; ++dx) {
            const std::size_t sx =
                mirror(static_cast<std::ptrdiff_t>(cx) + static_cast<std::ptrdiff_t>(dx) - half,
                       cube_->width);
            const std::size_t off = sy * cube_->width + sx;
            for (std::size_t band = 0; band < d; ++band)
                out.data[(band * p + dy) * p + dx] = cube_->values[band * plane + off];
        }
    }
    return out;
}

PatchSet extract_patches(std::shared_ptr<const HsiCube> cube, const LabelRaster& labels,
                         std::size_t patch_size) {
    if (patch_size % 2 == 0)
        throw_config("patches", "patch size must be odd, got " + std::to_string(patch_size));
    if (cube->height != labels.height || cube->width != labels.width)
        throw_structural("patches", "cube and label raster dimensions differ");
    PatchSet set(std::move(cube), patch_size, labels.num_classes);
    for (std::size_t y = 0; y < labels.height; ++y)
        for (std::size_t x = 0; x < labels.width; ++x) {
            const std::uint16_t id = labels.at(y, x);
            if (id == 0) continue;  // background never enters the set
            set.append(static_cast<std::uint32_t>(y), static_cast<std::uint32_t>(x),
                       static_cast<int>(id) - 1);
        }
    return set;
}

std::pair<PatchSet, PatchSet> stratified_split(const PatchSet& set, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0) || spec.train_fraction > 1.0)
        throw_config("split", "train fraction must be in (0, 1]");
    const std::size_t classes = set.num_classes();
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t i = 0; i < set.size(); ++i)
        by_class[static_cast<std::size_t>(set.target(i))].push_back(i);
    for (std::size_t c = 0; c < classes; ++c)
        if (by_class[c].empty())
            throw_data("split", "class " + std::to_string(c + 1) + " has no samples");

    Rng rng(spec.rng_seed);
    std::vector<bool> in_train(set.size(), false);
    for (std::size_t c = 0; c < classes; ++c) {
        auto& idx = by_class[c];
        rng.shuffle(idx);
        const auto n = static_cast<double>(idx.size());
        std::size_t take =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spec.train_fraction * n)));
        take = std::min(take, idx.size());
        for (std::size_t i = 0; i < take; ++i) in_train[idx[i]] = true;
    }

    PatchSet train(set.cube_ptr(), set.patch_size(), classes);
    PatchSet test(set.cube_ptr(), set.patch_size(), classes);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto [y, x] = set.coord(i);
        (in_train[i] ? train : test).append(y, x, set.target(i));
    }
    return {std::move(train), std::move(test)};
}

}  // namespace mgrnet
