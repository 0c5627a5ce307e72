#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mgrnet {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// Deterministic class palette: index 0 is the black background, classes
// 1..n get distinct colors (supports up to 16 classes).
std::vector<Rgb> class_palette(std::size_t num_classes);

// Binary PPM: "P6\n{w} {h}\n255\n" followed by 3*w*h bytes.
void write_ppm(const std::string& path, std::size_t width, std::size_t height,
               const std::vector<Rgb>& pixels);

}  // namespace mgrnet
