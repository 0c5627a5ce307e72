#include "mgrnet/hsi.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "mgrnet/errors.hpp"

namespace mgrnet {

namespace {

constexpr char kCubeMagic[8] = {'H', 'S', 'I', 'C', '0', '0', '0', '1'};
constexpr char kLabelMagic[8] = {'H', 'S', 'I', 'L', '0', '0', '0', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    const std::array<unsigned char, 4> b = {static_cast<unsigned char>(v & 0xff),
                                            static_cast<unsigned char>((v >> 8) & 0xff),
                                            static_cast<unsigned char>((v >> 16) & 0xff),
                                            static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32(std::istream& is, const std::string& what) {
    std::array<unsigned char, 4> b{};
    if (!is.read(reinterpret_cast<char*>(b.data()), 4))
        throw_data("hsi", "truncated container while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw_data("hsi", "cannot open '" + path + "'");
    return is;
}

void check_magic(std::istream& is, const char (&magic)[8], const std::string& path) {
    char got[8];
    if (!is.read(got, 8) || std::memcmp(got, magic, 8) != 0)
        throw_data("hsi", "bad magic in '" + path + "'");
}

}  // namespace

std::vector<double> HsiCube::spectrum(std::size_t y, std::size_t x) const {
    std::vector<double> s(bands);
    const std::size_t plane = height * width;
    const std::size_t off = y * width + x;
    for (std::size_t b = 0; b < bands; ++b) s[b] = values[b * plane + off];
    return s;
}

std::size_t LabelRaster::labeled_count() const {
    std::size_t n = 0;
    for (auto v : labels) n += v != 0;
    return n;
}

std::vector<std::size_t> LabelRaster::class_histogram() const {
    std::vector<std::size_t> hist(num_classes + 1, 0);
    for (auto v : labels) {
        if (v > num_classes) throw_data("hsi", "label id exceeds declared class count");
        ++hist[v];
    }
    return hist;
}

void save_cube(const HsiCube& cube, const std::string& path) {
    if (cube.values.size() != cube.pixels() * cube.bands)
        throw_structural("hsi", "cube value count does not match dimensions");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw_data("hsi", "cannot write '" + path + "'");
    os.write(kCubeMagic, 8);
    write_u32(os, static_cast<std::uint32_t>(cube.height));
    write_u32(os, static_cast<std::uint32_t>(cube.width));
    write_u32(os, static_cast<std::uint32_t>(cube.bands));
    static_assert(sizeof(float) == 4);
    os.write(reinterpret_cast<const char*>(cube.values.data()),
             static_cast<std::streamsize>(cube.values.size() * 4));
    if (!os) throw_data("hsi", "write failed for '" + path + "'");
}

HsiCube load_cube_file(const std::string& path) {
    auto is = open_input(path);
    check_magic(is, kCubeMagic, path);
    HsiCube cube;
    cube.height = read_u32(is, "height");
    cube.width = read_u32(is, "width");
    cube.bands = read_u32(is, "bands");
    if (cube.height == 0 || cube.width == 0 || cube.bands == 0)
        throw_data("hsi", "zero dimension in '" + path + "'");
    const std::size_t n = cube.pixels() * cube.bands;
    cube.values.resize(n);
    if (!is.read(reinterpret_cast<char*>(cube.values.data()), static_cast<std::streamsize>(n * 4)))
        throw_data("hsi", "payload shorter than header dimensions in '" + path + "'");
    if (is.get() != std::istream::traits_type::eof())
        throw_data("hsi", "payload longer than header dimensions in '" + path + "'");
    for (float v : cube.values)
        if (!std::isfinite(v)) throw_data("hsi", "non-finite value in '" + path + "'");
    return cube;
}

void save_labels(const LabelRaster& labels, const std::string& path) {
    if (labels.labels.size() != labels.height * labels.width)
        throw_structural("hsi", "label count does not match dimensions");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw_data("hsi", "cannot write '" + path + "'");
    os.write(kLabelMagic, 8);
    write_u32(os, static_cast<std::uint32_t>(labels.height));
    write_u32(os, static_cast<std::uint32_t>(labels.width));
    write_u32(os, static_cast<std::uint32_t>(labels.num_classes));
    for (std::uint16_t v : labels.labels) {
        const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>(v >> 8)};
        os.write(reinterpret_cast<const char*>(b), 2);
    }
    if (!os) throw_data("hsi", "write failed for '" + path + "'");
}

LabelRaster load_labels_file(const std::string& path) {
    auto is = open_input(path);
    check_magic(is, kLabelMagic, path);
    LabelRaster r;
    r.height = read_u32(is, "height");
    r.width = read_u32(is, "width");
    r.num_classes = read_u32(is, "num_classes");
    if (r.height == 0 || r.width == 0) throw_data("hsi", "zero dimension in '" + path + "'");
    const std::size_t n = r.height * r.width;
    r.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        unsigned char b[2];
        if (!is.read(reinterpret_cast<char*>(b), 2))
            throw_data("hsi", "payload shorter than header dimensions in '" + path + "'");
        r.labels[i] = static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    if (is.get() != std::istream::traits_type::eof())
        throw_data("hsi", "payload longer than header dimensions in '" + path + "'");
    for (auto v : r.labels)
        if (v > r.num_classes) throw_data("hsi", "label id exceeds declared class count");
    return r;
}

std::pair<HsiCube, LabelRaster> load_cube(const std::string& cube_path,
                                          const std::string& label_path) {
    HsiCube cube = load_cube_file(cube_path);
    LabelRaster labels = load_labels_file(label_path);
    if (cube.height != labels.height || cube.width != labels.width)
        throw_data("hsi", "label raster dimensions do not match the cube");
    return {std::move(cube), std::move(labels)};
}

std::size_t DatasetPreset::total_labeled() const {
    return std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0});
}

namespace {

const DatasetPreset kIndianPines{
    "indian_pines",
    145,
    145,
    200,
    100,
    {"Alfalfa", "Corn", "Corn-notill", "Grass-pasture", "Corn-mintill", "Grass-trees",
     "Grass-pasture-mowed", "Hay-windrowed", "Oats", "Soybean-notill", "Soybean-mintill",
     "Soybean-clean", "Wheat", "Woods", "Buildings-Grass-Trees-Drives", "Stone-Steel-Towers"},
    {46, 237, 1428, 483, 830, 730, 28, 478, 20, 972, 2455, 593, 205, 1265, 386, 93},
};

const DatasetPreset kPaviaUniversity{
    "pavia_university",
    610,
    340,
    103,
    50,
    {"Asphalt", "Meadows", "Gravel", "Trees", "Painted metal sheets", "Bare Soil", "Bitumen",
     "Self-Blocking Bricks", "Shadows"},
    {6631, 18649, 2099, 3064, 1345, 5029, 1330, 3682, 947},
};

const DatasetPreset kSalinasValley{
    "salinas_valley",
    512,
    217,
    204,
    29,
    {"Broccoli-green-weeds-1", "Broccoli-green-weeds-2", "Fallow", "Fallow-rough-plow",
     "Fallow-smooth", "Stubble", "Celery", "Grapes-untrained", "Soil-vinyard-develop",
     "Corn-senesced-green-weeds", "Lettuce-romaine-4wk", "Lettuce-romaine-5wk",
     "Lettuce-romaine-6wk", "Lettuce-romaine-7wk", "Vinyard-untrained",
     "Vinyard-vertical-trellis"},
    {2009, 3726, 1976, 1394, 2678, 3959, 3579, 11271, 6203, 3278, 1068, 1927, 916, 1070, 7268,
     1807},
};

}  // namespace

const DatasetPreset* find_preset(const std::string& name) {
    if (name == kIndianPines.name) return &kIndianPines;
    if (name == kPaviaUniversity.name) return &kPaviaUniversity;
    if (name == kSalinasValley.name) return &kSalinasValley;
    return nullptr;
}

void validate_against_preset(const HsiCube& cube, const LabelRaster& labels,
                             const DatasetPreset& preset) {
    if (cube.height != preset.height || cube.width != preset.width || cube.bands != preset.bands)
        throw_data("hsi", "cube dimensions do not match preset '" + preset.name + "'");
    if (labels.num_classes != preset.class_counts.size())
        throw_data("hsi", "class count does not match preset '" + preset.name + "'");
    const auto hist = labels.class_histogram();
    for (std::size_t c = 0; c < preset.class_counts.size(); ++c)
        if (hist[c + 1] != preset.class_counts[c])
            throw_data("hsi", "class " + std::to_string(c + 1) + " has " +
                                  std::to_string(hist[c + 1]) + " samples, preset expects " +
                                  std::to_string(preset.class_counts[c]));
}

}  // namespace mgrnet
