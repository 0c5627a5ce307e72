#pragma once

#include <cstddef>
#include <vector>

#include "mgrnet/hsi.hpp"

namespace mgrnet {

// Principal component basis fitted on per-pixel spectra.
struct PcaModel {
    std::size_t bands = 0;
    std::size_t dim = 0;
    std::vector<double> mean;        // [bands]
    std::vector<double> components;  // row-major [bands, dim]; columns orthonormal
    std::vector<double> eigenvalues; // all band eigenvalues, descending
    double explained_ratio = 0.0;    // cumulative variance fraction of the retained dim
};

// Fits on every pixel (background included). Retains the minimal dimension
// whose cumulative explained variance reaches `variance_target`, truncated
// to `cap` when cap > 0.
PcaModel fit_pca(const HsiCube& cube, double variance_target, std::size_t cap = 0);

// Projects each pixel spectrum: out = components^T (x - mean).
HsiCube apply_pca(const HsiCube& cube, const PcaModel& model);

// Fraction of total centered variance retained by projecting and
// reconstructing every pixel through the model.
double reconstruction_variance_ratio(const HsiCube& cube, const PcaModel& model);

// Jacobi eigendecomposition of a symmetric matrix (row-major [n,n]).
// Returns eigenvalues descending; `vectors[i*n+j]` is component i of the
// eigenvector for eigenvalue j. Exposed for reuse by the fit and tests.
void symmetric_eigen(const std::vector<double>& matrix, std::size_t n,
                     std::vector<double>& eigenvalues, std::vector<double>& vectors);

}  // namespace mgrnet
