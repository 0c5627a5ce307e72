#include "mgrnet/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgrnet/errors.hpp"

namespace mgrnet {

void symmetric_eigen(const std::vector<double>& matrix, std::size_t n,
                     std::vector<double>& eigenvalues, std::vector<double>& vectors) {
    if (matrix.size() != n * n) throw_structural("pca", "matrix size does not match n");
    std::vector<double> a = matrix;
    vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;

    // Cyclic Jacobi sweeps; fixed iteration order keeps the result
    // bit-reproducible for identical inputs.
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            diag += std::abs(a[i * n + i]);
            for (std::size_t j = i + 1; j < n; ++j) off += std::abs(a[i * n + j]);
        }
        if (off <= 1e-14 * std::max(diag, 1e-300)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p], aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i], aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = vectors[i * n + p], viq = vectors[i * n + q];
                    vectors[i * n + p] = c * vip - s * viq;
                    vectors[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    // Sort eigenpairs by decreasing eigenvalue (stable on ties).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> evals(n);
    for (std::size_t i = 0; i < n; ++i) evals[i] = a[i * n + i];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return evals[x] > evals[y]; });

    eigenvalues.resize(n);
    std::vector<double> sorted(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        eigenvalues[j] = evals[src];
        // Sign convention: largest-magnitude entry positive.
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double m = std::abs(vectors[i * n + src]);
            if (m > best) {
                best = m;
                arg = i;
            }
        }
        const double sign = vectors[arg * n + src] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) sorted[i * n + j] = sign * vectors[i * n + src];
    }
    vectors.swap(sorted);
}

PcaModel fit_pca(const HsiCube& cube, double variance_target, std::size_t cap) {
    if (cube.bands < 2) throw_config("pca", "needs at least 2 bands");
    if (!(variance_target > 0.0) || variance_target > 1.0)
        throw_config("pca", "variance target must be in (0, 1]");

    const std::size_t b = cube.bands;
    const std::size_t plane = cube.pixels();
    const double inv_n = 1.0 / static_cast<double>(plane);

    PcaModel model;
    model.bands = b;
    model.mean.assign(b, 0.0);
    for (std::size_t band = 0; band < b; ++band) {
        const float* p = cube.values.data() + band * plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
        model.mean[band] = acc * inv_n;
    }

    // Band planes are contiguous, so the covariance reduces to plane dots.
    std::vector<double> cov(b * b, 0.0);
    for (std::size_t b1 = 0; b1 < b; ++b1) {
        const float* p1 = cube.values.data() + b1 * plane;
        for (std::size_t b2 = b1; b2 < b; ++b2) {
            const float* p2 = cube.values.data() + b2 * plane;
            double acc = 0.0;
            for (std::size_t i = 0; i < plane; ++i)
                acc += static_cast<double>(p1[i]) * static_cast<double>(p2[i]);
            const double c = acc * inv_n - model.mean[b1] * model.mean[b2];
            cov[b1 * b + b2] = c;
            cov[b2 * b + b1] = c;
        }
    }

    std::vector<double> vectors;
    symmetric_eigen(cov, b, model.eigenvalues, vectors);

    double total = 0.0;
    for (double& ev : model.eigenvalues) {
        if (ev < 0.0) ev = 0.0;  // numerical noise
        total += ev;
    }
    if (total <= 1e-30) throw_data("pca", "degenerate covariance: all pixels identical");

    std::size_t dim = b;
    double cum = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
        cum += model.eigenvalues[j];
        if (cum >= variance_target * total) {
            dim = j + 1;
            break;
        }
    }
    if (cap > 0) dim = std::min(dim, cap);
    model.dim = dim;

    double retained = 0.0;
    for (std::size_t j = 0; j < dim; ++j) retained += model.eigenvalues[j];
    model.explained_ratio = retained / total;

    model.components.assign(b * dim, 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < dim; ++j) model.components[i * dim + j] = vectors[i * b + j];
    return model;
}

HsiCube apply_pca(const HsiCube& cube, const PcaModel& model) {
    if (cube.bands != model.bands)
        throw_structural("pca", "cube has " + std::to_string(cube.bands) + " bands, model expects " +
                                    std::to_string(model.bands));
    const std::size_t plane = cube.pixels();
    const std::size_t d = model.dim;
    std::vector<double> acc(d * plane, 0.0);
    for (std::size_t band = 0; band < cube.bands; ++band) {
        const float* src = cube.values.data() + band * plane;
        const double mu = model.mean[band];
        for (std::size_t j = 0; j < d; ++j) {
            const double c = model.components[band * d + j];
            if (c == 0.0) continue;
            double* dst = acc.data() + j * plane;
            for (std::size_t i = 0; i < plane; ++i) dst[i] += c * (src[i] - mu);
        }
    }
    HsiCube out;
    out.height = cube.height;
    out.width = cube.width;
    out.bands = d;
    out.values.resize(d * plane);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = static_cast<float>(acc[i]);
    return out;
}

double reconstruction_variance_ratio(const HsiCube& cube, const PcaModel& model) {
    if (cube.bands != model.bands) throw_structural("pca", "band mismatch");
    const std::size_t plane = cube.pixels();
    const std::size_t d = model.dim;
    double residual = 0.0, total = 0.0;
    std::vector<double> centered(cube.bands), proj(d);
    for (std::size_t px = 0; px < plane; ++px) {
        for (std::size_t band = 0; band < cube.bands; ++band)
            centered[band] = static_cast<double>(cube.values[band * plane + px]) - model.mean[band];
        std::fill(proj.begin(), proj.end(), 0.0);
        for (std::size_t band = 0; band < cube.bands; ++band) {
            const double v = centered[band];
            for (std::size_t j = 0; j < d; ++j) proj[j] += model.components[band * d + j] * v;
        }
        for (std::size_t band = 0; band < cube.bands; ++band) {
            double rec = 0.0;
            for (std::size_t j = 0; j < d; ++j) rec += model.components[band * d + j] * proj[j];
            const double diff = centered[band] - rec;
            residual += diff * diff;
            total += centered[band] * centered[band];
        }
    }
    if (total <= 0.0) throw_data("pca", "degenerate cube");
    return 1.0 - residual / total;
}

}  // namespace mgrnet
