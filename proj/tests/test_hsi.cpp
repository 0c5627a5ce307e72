#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mgrnet/errors.hpp"
#include "mgrnet/hsi.hpp"
#include "mgrnet/synthetic.hpp"

using namespace mgrnet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "mgrnet_hsi_tests";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("hsi: hand-written 2x2x3 container round trips exactly") {
    HsiCube cube;
    cube.height = 2;
    cube.width = 2;
    cube.bands = 3;
    cube.values = {0.0f, 1.0f, 2.0f, 3.0f,          // band 0
                   10.0f, 11.0f, 12.0f, 13.0f,      // band 1
                   -1.5f, 2.25f, 0.125f, 1e-3f};    // band 2
    const auto path = (temp_dir() / "toy.hsic").string();
    save_cube(cube, path);

    // 8-byte magic + three u32 dims + 12 f32 values
    CHECK(fs::file_size(path) == 8 + 12 + 12 * 4);

    const HsiCube back = load_cube_file(path);
    CHECK(back.height == 2);
    CHECK(back.width == 2);
    CHECK(back.bands == 3);
    CHECK(back.values == cube.values);
    CHECK(back.at(0, 1, 1) == 11.0f);
    CHECK(back.spectrum(1, 0)[2] == doctest::Approx(0.125));
}

TEST_CASE("hsi: label container round trip and histogram") {
    LabelRaster labels;
    labels.height = 2;
    labels.width = 3;
    labels.num_classes = 4;
    labels.labels = {0, 1, 2, 2, 4, 0};
    const auto path = (temp_dir() / "toy.hsil").string();
    save_labels(labels, path);
    const LabelRaster back = load_labels_file(path);
    CHECK(back.labels == labels.labels);
    CHECK(back.labeled_count() == 4);
    const auto hist = back.class_histogram();
    CHECK(hist == std::vector<std::size_t>{2, 1, 2, 0, 1});
}

TEST_CASE("hsi: load errors are distinct and typed") {
    const auto dir = temp_dir();

    SUBCASE("bad magic") {
        const auto path = (dir / "bad_magic.hsic").string();
        std::ofstream(path, std::ios::binary) << "NOTMAGIC" << std::string(32, '\0');
        CHECK_THROWS_WITH_AS(load_cube_file(path), doctest::Contains("bad magic"), Error);
    }
    SUBCASE("payload shorter than header") {
        const auto path = (dir / "short.hsic").string();
        std::ofstream os(path, std::ios::binary);
        os << "HSIC0001";
        const std::uint32_t dims[3] = {2, 2, 3};
        os.write(reinterpret_cast<const char*>(dims), 12);
        const float vals[4] = {1, 2, 3, 4};  // 4 of 12 values
        os.write(reinterpret_cast<const char*>(vals), 16);
        os.close();
        CHECK_THROWS_WITH_AS(load_cube_file(path), doctest::Contains("shorter"), Error);
    }
    SUBCASE("payload longer than header") {
        const auto path = (dir / "long.hsic").string();
        std::ofstream os(path, std::ios::binary);
        os << "HSIC0001";
        const std::uint32_t dims[3] = {1, 1, 1};
        os.write(reinterpret_cast<const char*>(dims), 12);
        const float vals[3] = {1, 2, 3};
        os.write(reinterpret_cast<const char*>(vals), 12);
        os.close();
        CHECK_THROWS_WITH_AS(load_cube_file(path), doctest::Contains("longer"), Error);
    }
    SUBCASE("non-finite values") {
        const auto path = (dir / "nan.hsic").string();
        std::ofstream os(path, std::ios::binary);
        os << "HSIC0001";
        const std::uint32_t dims[3] = {1, 1, 2};
        os.write(reinterpret_cast<const char*>(dims), 12);
        const float vals[2] = {1.0f, std::nanf("")};
        os.write(reinterpret_cast<const char*>(vals), 8);
        os.close();
        CHECK_THROWS_WITH_AS(load_cube_file(path), doctest::Contains("non-finite"), Error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_cube_file((dir / "absent.hsic").string()), Error);
    }
    SUBCASE("cube/label dimension mismatch") {
        HsiCube cube;
        cube.height = 2;
        cube.width = 2;
        cube.bands = 1;
        cube.values.assign(4, 0.5f);
        LabelRaster labels;
        labels.height = 3;
        labels.width = 2;
        labels.num_classes = 1;
        labels.labels.assign(6, 1);
        const auto cp = (dir / "mismatch.hsic").string();
        const auto lp = (dir / "mismatch.hsil").string();
        save_cube(cube, cp);
        save_labels(labels, lp);
        CHECK_THROWS_AS(load_cube(cp, lp), Error);
    }
}

TEST_CASE("hsi: benchmark presets carry the published totals") {
    const DatasetPreset* ip = find_preset("indian_pines");
    REQUIRE(ip != nullptr);
    CHECK(ip->total_labeled() == 10249);
    CHECK(ip->class_counts.size() == 16);
    CHECK(ip->pca_cap == 100);
    CHECK(ip->height == 145);

    const DatasetPreset* pavia = find_preset("pavia_university");
    REQUIRE(pavia != nullptr);
    CHECK(pavia->total_labeled() == 42776);
    CHECK(pavia->class_counts.size() == 9);
    CHECK(pavia->pca_cap == 50);

    const DatasetPreset* salinas = find_preset("salinas_valley");
    REQUIRE(salinas != nullptr);
    CHECK(salinas->total_labeled() == 54129);
    CHECK(salinas->pca_cap == 29);

    CHECK(find_preset("unknown") == nullptr);
}

TEST_CASE("hsi: preset validation rejects wrong class counts") {
    auto [cube, labels] = make_synthetic(SyntheticSpec{});
    const DatasetPreset* ip = find_preset("indian_pines");
    REQUIRE(ip != nullptr);
    CHECK_THROWS_AS(validate_against_preset(cube, labels, *ip), Error);
}
