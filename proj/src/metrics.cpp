#include "mgrnet/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "mgrnet/errors.hpp"

namespace mgrnet {

EvalReport report_from_confusion(std::vector<std::int64_t> matrix, std::size_t num_classes) {
    if (matrix.size() != num_classes * num_classes)
        throw_structural("metrics", "confusion matrix size does not match class count");
    EvalReport r;
    r.num_classes = num_classes;
    r.matrix = std::move(matrix);
    std::vector<std::int64_t> row_sum(num_classes, 0), col_sum(num_classes, 0);
    std::int64_t trace = 0;
    for (std::size_t i = 0; i < num_classes; ++i) {
        for (std::size_t j = 0; j < num_classes; ++j) {
            const std::int64_t v = r.matrix[i * num_classes + j];
            if (v < 0) throw_data("metrics", "negative confusion matrix entry");
            row_sum[i] += v;
            col_sum[j] += v;
            r.total += v;
            if (i == j) trace += v;
        }
    }
    if (r.total == 0) throw_data("metrics", "empty confusion matrix");

    r.oa = static_cast<double>(trace) / static_cast<double>(r.total);

    r.per_class_recall.assign(num_classes, -1.0);
    double recall_sum = 0.0;
    std::size_t supported = 0;
    for (std::size_t i = 0; i < num_classes; ++i) {
        if (row_sum[i] == 0) continue;
        r.per_class_recall[i] =
            static_cast<double>(r.matrix[i * num_classes + i]) / static_cast<double>(row_sum[i]);
        recall_sum += r.per_class_recall[i];
        ++supported;
    }
    r.aa = supported ? recall_sum / static_cast<double>(supported) : 0.0;

    double pe = 0.0;
    const double n = static_cast<double>(r.total);
    for (std::size_t i = 0; i < num_classes; ++i)
        pe += static_cast<double>(row_sum[i]) * static_cast<double>(col_sum[i]) / (n * n);
    // p_e == 1 forces a single-class diagonal matrix, i.e. perfect agreement.
    r.kappa = (1.0 - pe) < 1e-15 ? 1.0 : (r.oa - pe) / (1.0 - pe);
    return r;
}

EvalReport report_from_pairs(std::span<const int> truth, std::span<const int> predicted,
                             std::size_t num_classes) {
    if (truth.size() != predicted.size())
        throw_structural("metrics", "truth/prediction length mismatch");
    std::vector<std::int64_t> m(num_classes * num_classes, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int t = truth[i], p = predicted[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= num_classes ||
            static_cast<std::size_t>(p) >= num_classes)
            throw_usage("metrics", "class id out of range at sample " + std::to_string(i));
        ++m[static_cast<std::size_t>(t) * num_classes + static_cast<std::size_t>(p)];
    }
    return report_from_confusion(std::move(m), num_classes);
}

std::string EvalReport::to_text(const std::vector<std::string>& class_names) const {
    std::ostringstream os;
    os << "confusion matrix (" << num_classes << " classes, rows = true, cols = predicted)\n";
    for (std::size_t i = 0; i < num_classes; ++i) {
        for (std::size_t j = 0; j < num_classes; ++j) {
            if (j) os << '\t';
            os << at(i, j);
        }
        if (i < class_names.size()) os << "\t# " << class_names[i];
        os << '\n';
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "OA\t%.6f\nAA\t%.6f\nKappa\t%.6f\n", oa, aa, kappa);
    os << buf;
    return os.str();
}

}  // namespace mgrnet
