#include <doctest.h>

#include <cmath>

#include "mgrnet/errors.hpp"
#include "mgrnet/pca.hpp"
#include "mgrnet/rng.hpp"

using namespace mgrnet;

namespace {

HsiCube random_cube(std::size_t h, std::size_t w, std::size_t bands, Rng& rng) {
    HsiCube cube;
    cube.height = h;
    cube.width = w;
    cube.bands = bands;
    cube.values.resize(h * w * bands);
    for (auto& v : cube.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return cube;
}

// Cube whose spectra lie exactly in the span of `rank` fixed directions.
HsiCube low_rank_cube(std::size_t h, std::size_t w, std::size_t bands, std::size_t rank,
                      Rng& rng) {
    std::vector<std::vector<double>> basis(rank, std::vector<double>(bands));
    for (std::size_t r = 0; r < rank; ++r)
        for (std::size_t b = 0; b < bands; ++b) basis[r][b] = rng.uniform(-1.0, 1.0);
    HsiCube cube;
    cube.height = h;
    cube.width = w;
    cube.bands = bands;
    cube.values.assign(h * w * bands, 0.0f);
    const std::size_t plane = h * w;
    for (std::size_t px = 0; px < plane; ++px) {
        std::vector<double> coeff(rank);
        for (auto& c : coeff) c = rng.uniform(-2.0, 2.0);
        for (std::size_t b = 0; b < bands; ++b) {
            double acc = 0;
            for (std::size_t r = 0; r < rank; ++r) acc += coeff[r] * basis[r][b];
            cube.values[b * plane + px] = static_cast<float>(acc);
        }
    }
    return cube;
}

// Independent eigensolver oracle: power iteration with Hotelling deflation.
std::vector<double> power_iteration_eigenvalues(std::vector<double> m, std::size_t n,
                                                std::size_t count) {
    std::vector<double> evals;
    Rng rng(99);
    for (std::size_t e = 0; e < count; ++e) {
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform(0.1, 1.0);
        double lambda = 0;
        for (int it = 0; it < 5000; ++it) {
            std::vector<double> next(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) next[i] += m[i * n + j] * v[j];
            double norm = 0;
            for (double x : next) norm += x * x;
            norm = std::sqrt(norm);
            if (norm < 1e-300) break;
            for (auto& x : next) x /= norm;
            double new_lambda = 0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) new_lambda += next[i] * m[i * n + j] * next[j];
            v = next;
            if (std::abs(new_lambda - lambda) < 1e-13 * std::max(1.0, std::abs(new_lambda)) &&
                it > 10)
                break;
            lambda = new_lambda;
        }
        evals.push_back(lambda);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m[i * n + j] -= lambda * v[i] * v[j];
    }
    return evals;
}

}  // namespace

TEST_CASE("pca: exact rank-3 cube retains 3 dims with full variance") {
    Rng rng(21);
    const HsiCube cube = low_rank_cube(12, 12, 10, 3, rng);
    const PcaModel model = fit_pca(cube, 0.9999);
    CHECK(model.dim == 3);
    CHECK(model.explained_ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca: perfectly correlated 2-band cube reduces to 1 dim") {
    HsiCube cube;
    cube.height = 4;
    cube.width = 4;
    cube.bands = 2;
    cube.values.resize(32);
    Rng rng(22);
    for (std::size_t px = 0; px < 16; ++px) {
        const double v = rng.uniform(-1.0, 1.0);
        cube.values[px] = static_cast<float>(v);
        cube.values[16 + px] = static_cast<float>(3.0 * v);  // exact multiple
    }
    const PcaModel model = fit_pca(cube, 0.9999);
    CHECK(model.dim == 1);
}

TEST_CASE("pca: projected variances match an independent eigensolver oracle") {
    Rng rng(23);
    const HsiCube cube = random_cube(20, 20, 10, rng);
    const PcaModel model = fit_pca(cube, 1.0);
    REQUIRE(model.dim == 10);

    // Oracle covariance computed from scratch.
    const std::size_t plane = cube.pixels();
    std::vector<double> mean(10, 0.0), cov(100, 0.0);
    for (std::size_t b = 0; b < 10; ++b) {
        for (std::size_t px = 0; px < plane; ++px) mean[b] += cube.values[b * plane + px];
        mean[b] /= static_cast<double>(plane);
    }
    for (std::size_t b1 = 0; b1 < 10; ++b1)
        for (std::size_t b2 = 0; b2 < 10; ++b2) {
            double acc = 0;
            for (std::size_t px = 0; px < plane; ++px)
                acc += (cube.values[b1 * plane + px] - mean[b1]) *
                       (cube.values[b2 * plane + px] - mean[b2]);
            cov[b1 * 10 + b2] = acc / static_cast<double>(plane);
        }
    const auto oracle = power_iteration_eigenvalues(cov, 10, 10);

    for (std::size_t j = 0; j < 10; ++j)
        CHECK(model.eigenvalues[j] == doctest::Approx(oracle[j]).epsilon(1e-7));

    // Per-component variance of the projected data equals the eigenvalues.
    const HsiCube reduced = apply_pca(cube, model);
    for (std::size_t j = 0; j < 10; ++j) {
        double m = 0, v = 0;
        for (std::size_t px = 0; px < plane; ++px) m += reduced.values[j * plane + px];
        m /= static_cast<double>(plane);
        for (std::size_t px = 0; px < plane; ++px) {
            const double x = reduced.values[j * plane + px] - m;
            v += x * x;
        }
        v /= static_cast<double>(plane);
        CHECK(v == doctest::Approx(model.eigenvalues[j]).epsilon(1e-5));
    }

    // Variance sorted non-increasing.
    for (std::size_t j = 1; j < 10; ++j) CHECK(model.eigenvalues[j] <= model.eigenvalues[j - 1] + 1e-12);
}

TEST_CASE("pca: components are orthonormal") {
    Rng rng(24);
    const HsiCube cube = random_cube(15, 15, 8, rng);
    const PcaModel model = fit_pca(cube, 0.9999);
    for (std::size_t a = 0; a < model.dim; ++a)
        for (std::size_t b = 0; b < model.dim; ++b) {
            double dot = 0;
            for (std::size_t i = 0; i < model.bands; ++i)
                dot += model.components[i * model.dim + a] * model.components[i * model.dim + b];
            CHECK(std::abs(dot - (a == b ? 1.0 : 0.0)) < 1e-6);
        }
}

TEST_CASE("pca: cap truncates after the variance rule") {
    Rng rng(25);
    const HsiCube cube = random_cube(20, 20, 12, rng);  // full-rank noise
    const PcaModel uncapped = fit_pca(cube, 0.9999);
    CHECK(uncapped.dim > 4);
    const PcaModel capped = fit_pca(cube, 0.9999, 4);
    CHECK(capped.dim == 4);
    CHECK(capped.explained_ratio < uncapped.explained_ratio);
    const HsiCube reduced = apply_pca(cube, capped);
    CHECK(reduced.bands == 4);
}

TEST_CASE("pca: identity model leaves the cube unchanged") {
    Rng rng(26);
    const HsiCube cube = random_cube(6, 5, 4, rng);
    PcaModel identity;
    identity.bands = 4;
    identity.dim = 4;
    identity.mean.assign(4, 0.0);
    identity.components.assign(16, 0.0);
    for (std::size_t i = 0; i < 4; ++i) identity.components[i * 4 + i] = 1.0;
    identity.explained_ratio = 1.0;
    const HsiCube out = apply_pca(cube, identity);
    for (std::size_t i = 0; i < cube.values.size(); ++i)
        CHECK(out.values[i] == doctest::Approx(cube.values[i]).epsilon(1e-6));
}

TEST_CASE("pca: reconstruction retains at least the explained variance") {
    Rng rng(27);
    const HsiCube cube = random_cube(18, 14, 9, rng);
    const PcaModel model = fit_pca(cube, 0.95);
    const double ratio = reconstruction_variance_ratio(cube, model);
    CHECK(ratio >= 0.95 - 1e-6);
    CHECK(ratio == doctest::Approx(model.explained_ratio).epsilon(1e-5));
}

TEST_CASE("pca: error paths") {
    Rng rng(28);
    HsiCube cube = random_cube(4, 4, 3, rng);
    CHECK_THROWS_AS(fit_pca(cube, 0.0), Error);
    CHECK_THROWS_AS(fit_pca(cube, 1.5), Error);

    HsiCube flat;
    flat.height = 3;
    flat.width = 3;
    flat.bands = 2;
    flat.values.assign(18, 1.0f);  // all pixels identical
    CHECK_THROWS_AS(fit_pca(flat, 0.9999), Error);

    const PcaModel model = fit_pca(cube, 0.9999);
    HsiCube wrong = random_cube(4, 4, 5, rng);
    CHECK_THROWS_AS(apply_pca(wrong, model), Error);
}
