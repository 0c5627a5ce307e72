#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mgrnet {

// Hyperspectral cube, band-sequential: values[b * H * W + y * W + x].
struct HsiCube {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t bands = 0;
    std::vector<float> values;

    float at(std::size_t y, std::size_t x, std::size_t band) const {
        return values[band * height * width + y * width + x];
    }
    float& at(std::size_t y, std::size_t x, std::size_t band) {
        return values[band * height * width + y * width + x];
    }
    std::size_t pixels() const { return height * width; }

    // Spectrum of one pixel as a dense vector.
    std::vector<double> spectrum(std::size_t y, std::size_t x) const;
};

// Per-pixel class ids; 0 is unlabeled background, 1..num_classes are classes.
struct LabelRaster {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t num_classes = 0;
    std::vector<std::uint16_t> labels;

    std::uint16_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }
    std::size_t labeled_count() const;
    std::vector<std::size_t> class_histogram() const;  // index 0 = background
};

// Binary container IO. Cube: magic "HSIC0001", u32 LE height/width/bands,
// then f32 LE values band-sequential. Labels: magic "HSIL0001", u32 LE
// height/width/num_classes, then u16 LE labels row-major.
void save_cube(const HsiCube& cube, const std::string& path);
HsiCube load_cube_file(const std::string& path);
void save_labels(const LabelRaster& labels, const std::string& path);
LabelRaster load_labels_file(const std::string& path);

// Loads both halves of a dataset and cross-checks their dimensions.
std::pair<HsiCube, LabelRaster> load_cube(const std::string& cube_path,
                                          const std::string& label_path);

// Benchmark dataset descriptions used for validation, PCA caps and reporting.
struct DatasetPreset {
    std::string name;
    std::size_t height, width, bands;
    std::size_t pca_cap;
    std::vector<std::string> class_names;
    std::vector<std::size_t> class_counts;  // expected labeled pixels per class
    std::size_t total_labeled() const;
};

// Known presets: "indian_pines", "pavia_university", "salinas_valley".
const DatasetPreset* find_preset(const std::string& name);

// Checks a loaded dataset against its preset; throws a data error on mismatch.
void validate_against_preset(const HsiCube& cube, const LabelRaster& labels,
                             const DatasetPreset& preset);

}  // namespace mgrnet
