#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "mgrnet/hsi.hpp"
#include "mgrnet/tensor.hpp"

namespace mgrnet {

// One sample per labeled pixel: the [bands, p, p] neighborhood centered on
// it (mirror padded at borders) and its 0-based class id. Patches are
// materialized on demand; the set only stores coordinates.
class PatchSet {
  public:
    PatchSet() = default;
    PatchSet(std::shared_ptr<const HsiCube> cube, std::size_t patch_size, std::size_t num_classes)
        : cube_(std::move(cube)), patch_size_(patch_size), num_classes_(num_classes) {}

    std::size_t size() const { return coords_.size(); }
    bool empty() const { return coords_.empty(); }
    std::size_t patch_size() const { return patch_size_; }
    std::size_t bands() const { return cube_->bands; }
    std::size_t num_classes() const { return num_classes_; }
    const HsiCube& cube() const { return *cube_; }
    std::shared_ptr<const HsiCube> cube_ptr() const { return cube_; }

    int target(std::size_t i) const { return targets_[i]; }
    std::pair<std::uint32_t, std::uint32_t> coord(std::size_t i) const { return coords_[i]; }
    const std::vector<int>& targets() const { return targets_; }

    Tensor patch(std::size_t i) const;

    void append(std::uint32_t y, std::uint32_t x, int target) {
        coords_.push_back({y, x});
        targets_.push_back(target);
    }

  private:
    std::shared_ptr<const HsiCube> cube_;
    std::size_t patch_size_ = 1;
    std::size_t num_classes_ = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> coords_;
    std::vector<int> targets_;
};

struct SplitSpec {
    double train_fraction = 0.2;
    std::uint64_t rng_seed = 0;
};

// Builds one patch per labeled (non-background) pixel, row-major pixel order.
PatchSet extract_patches(std::shared_ptr<const HsiCube> cube, const LabelRaster& labels,
                         std::size_t patch_size);

// Per class c with n_c samples the train side receives
// max(1, round(fraction * n_c)) samples, drawn without replacement with the
// seeded generator; the two sides partition the input.
std::pair<PatchSet, PatchSet> stratified_split(const PatchSet& set, const SplitSpec& spec);

}  // namespace mgrnet
