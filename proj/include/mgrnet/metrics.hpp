#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mgrnet {

// Confusion matrix plus the three agreement coefficients. Rows index the
// true class, columns the predicted class.
struct EvalReport {
    std::size_t num_classes = 0;
    std::vector<std::int64_t> matrix;  // row-major [C, C]
    std::int64_t total = 0;
    double oa = 0.0;     // trace / total
    double aa = 0.0;     // mean recall over classes with >= 1 true sample
    double kappa = 0.0;  // (p_o - p_e) / (1 - p_e)
    std::vector<double> per_class_recall;  // -1 for classes without true samples

    std::int64_t at(std::size_t true_c, std::size_t pred_c) const {
        return matrix[true_c * num_classes + pred_c];
    }

    std::string to_text(const std::vector<std::string>& class_names = {}) const;
};

// Computes OA/AA/Kappa from an already-filled confusion matrix.
EvalReport report_from_confusion(std::vector<std::int64_t> matrix, std::size_t num_classes);

// Builds the confusion matrix from (true, predicted) class-id pairs.
EvalReport report_from_pairs(std::span<const int> truth, std::span<const int> predicted,
                             std::size_t num_classes);

}  // namespace mgrnet
