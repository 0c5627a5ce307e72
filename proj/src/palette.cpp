#include "mgrnet/palette.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "mgrnet/errors.hpp"

namespace mgrnet {

std::vector<Rgb> class_palette(std::size_t num_classes) {
    static constexpr std::array<Rgb, 16> kColors = {{
        {230, 25, 75},    // red
        {60, 180, 75},    // green
        {255, 225, 25},   // yellow
        {0, 130, 200},    // blue
        {245, 130, 48},   // orange
        {145, 30, 180},   // purple
        {70, 240, 240},   // cyan
        {240, 50, 230},   // magenta
        {210, 245, 60},   // lime
        {250, 190, 212},  // pink
        {0, 128, 128},    // teal
        {220, 190, 255},  // lavender
        {170, 110, 40},   // brown
        {255, 250, 200},  // beige
        {128, 0, 0},      // maroon
        {170, 255, 195},  // mint
    }};
    if (num_classes > kColors.size())
        throw_config("palette", "palette supports up to " + std::to_string(kColors.size()) +
                                    " classes, got " + std::to_string(num_classes));
    std::vector<Rgb> palette(num_classes + 1);
    palette[0] = Rgb{0, 0, 0};
    for (std::size_t c = 0; c < num_classes; ++c) palette[c + 1] = kColors[c];
    return palette;
}

void write_ppm(const std::string& path, std::size_t width, std::size_t height,
               const std::vector<Rgb>& pixels) {
    if (pixels.size() != width * height)
        throw_structural("ppm", "pixel count does not match dimensions");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw_data("ppm", "cannot write '" + path + "'");
    char header[64];
    const int n = std::snprintf(header, sizeof(header), "P6\n%zu %zu\n255\n", width, height);
    os.write(header, n);
    for (const Rgb& px : pixels) {
        const char rgb[3] = {static_cast<char>(px.r), static_cast<char>(px.g),
                             static_cast<char>(px.b)};
        os.write(rgb, 3);
    }
    if (!os) throw_data("ppm", "write failed for '" + path + "'");
}

}  // namespace mgrnet
