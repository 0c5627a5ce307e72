#include <doctest.h>

#include <cmath>

#include "mgrnet/errors.hpp"
#include "mgrnet/metrics.hpp"
#include "mgrnet/rng.hpp"

using namespace mgrnet;

namespace {

// From-scratch recomputation used as the oracle; independent of
// report_from_confusion's internals.
struct NaiveMetrics {
    double oa, aa, kappa;
};

NaiveMetrics naive_metrics(const std::vector<std::int64_t>& m, std::size_t c) {
    double total = 0, diag = 0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            total += static_cast<double>(m[i * c + j]);
            if (i == j) diag += static_cast<double>(m[i * c + j]);
        }
    const double oa = diag / total;
    double recall_sum = 0;
    std::size_t supported = 0;
    for (std::size_t i = 0; i < c; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < c; ++j) row += static_cast<double>(m[i * c + j]);
        if (row == 0) continue;
        recall_sum += static_cast<double>(m[i * c + i]) / row;
        ++supported;
    }
    const double aa = recall_sum / static_cast<double>(supported);
    double pe = 0;
    for (std::size_t i = 0; i < c; ++i) {
        double row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += static_cast<double>(m[i * c + j]);
            col += static_cast<double>(m[j * c + i]);
        }
        pe += (row / total) * (col / total);
    }
    const double kappa = pe >= 1.0 ? 1.0 : (oa - pe) / (1.0 - pe);
    return {oa, aa, kappa};
}

}  // namespace

TEST_CASE("metrics: perfect diagonal -> OA = AA = Kappa = 1") {
    std::vector<std::int64_t> m = {10, 0, 0, 0, 20, 0, 0, 0, 30};
    const EvalReport r = report_from_confusion(m, 3);
    CHECK(r.oa == 1.0);
    CHECK(r.aa == 1.0);
    CHECK(r.kappa == 1.0);
}

TEST_CASE("metrics: chance agreement -> Kappa = 0") {
    const EvalReport r = report_from_confusion({25, 25, 25, 25}, 2);
    CHECK(r.oa == 0.5);
    CHECK(r.kappa == 0.0);
}

TEST_CASE("metrics: [[40,10],[20,30]] -> OA 0.70, Kappa 0.40") {
    const EvalReport r = report_from_confusion({40, 10, 20, 30}, 2);
    CHECK(r.oa == doctest::Approx(0.70).epsilon(1e-15));
    // p_e = (50*60 + 50*40) / 100^2 = 0.50
    CHECK(r.kappa == doctest::Approx(0.40).epsilon(1e-15));
    CHECK(r.aa == doctest::Approx((0.8 + 0.6) / 2.0).epsilon(1e-15));
}

TEST_CASE("metrics: 100 random matrices match the from-scratch recount") {
    Rng rng(42);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t c = 2 + static_cast<std::size_t>(rng.below(7));
        std::vector<std::int64_t> m(c * c);
        for (auto& v : m) v = static_cast<std::int64_t>(rng.below(50));
        m[0] += 1;  // keep the matrix non-empty
        const EvalReport r = report_from_confusion(m, c);
        const NaiveMetrics n = naive_metrics(m, c);
        CHECK(std::abs(r.oa - n.oa) < 1e-12);
        CHECK(std::abs(r.aa - n.aa) < 1e-12);
        CHECK(std::abs(r.kappa - n.kappa) < 1e-12);
        CHECK(r.kappa >= -1.0 - 1e-12);
        CHECK(r.kappa <= 1.0 + 1e-12);
    }
}

TEST_CASE("metrics: single-class diagonal still gives Kappa 1") {
    const EvalReport r = report_from_confusion({7, 0, 0, 0}, 2);
    CHECK(r.oa == 1.0);
    CHECK(r.kappa == 1.0);
}

TEST_CASE("metrics: AA skips classes without true samples") {
    // class 1 never occurs as truth
    const EvalReport r = report_from_confusion({8, 0, 2, 0, 0, 0, 1, 0, 9}, 3);
    CHECK(r.per_class_recall[1] == -1.0);
    CHECK(r.aa == doctest::Approx((0.8 + 0.9) / 2.0).epsilon(1e-15));
}

TEST_CASE("metrics: pairs path matches brute-force recount") {
    Rng rng(43);
    std::vector<int> truth, pred;
    for (int i = 0; i < 500; ++i) {
        truth.push_back(static_cast<int>(rng.below(4)));
        pred.push_back(static_cast<int>(rng.below(4)));
    }
    const EvalReport r = report_from_pairs(truth, pred, 4);
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == pred[i];
    CHECK(r.total == 500);
    CHECK(r.oa == doctest::Approx(static_cast<double>(correct) / 500.0).epsilon(1e-15));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        // every pair lands in exactly one cell; spot-check a recount
        std::int64_t count = 0;
        for (std::size_t j = 0; j < truth.size(); ++j)
            count += truth[j] == truth[i] && pred[j] == pred[i];
        CHECK(r.at(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(pred[i])) == count);
        if (i > 20) break;
    }
}

TEST_CASE("metrics: error paths") {
    CHECK_THROWS_AS(report_from_confusion({1, 2, 3}, 2), Error);
    CHECK_THROWS_AS(report_from_confusion({0, 0, 0, 0}, 2), Error);
    std::vector<int> t{0, 1}, p{0, 5};
    CHECK_THROWS_AS(report_from_pairs(t, p, 2), Error);
}

TEST_CASE("metrics: report text contains matrix and coefficients") {
    const EvalReport r = report_from_confusion({40, 10, 20, 30}, 2);
    const std::string text = r.to_text({"a", "b"});
    CHECK(text.find("OA\t0.700000") != std::string::npos);
    CHECK(text.find("Kappa\t0.400000") != std::string::npos);
    CHECK(text.find("# a") != std::string::npos);
}
