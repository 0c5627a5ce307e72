#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mgrnet/config.hpp"
#include "mgrnet/hsi.hpp"
#include "mgrnet/patches.hpp"
#include "mgrnet/pca.hpp"
#include "mgrnet/train.hpp"

namespace mgrnet {

// Load -> PCA -> patches, shared by train/sweep/map.
struct PreparedData {
    LabelRaster labels;
    PcaModel pca;
    PatchSet all;  // one patch per labeled pixel, over the reduced cube
    ModelConfig model_cfg;
    const DatasetPreset* preset = nullptr;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct ExperimentResult {
    EvalReport report;
    TrainTrace trace;
    std::string checkpoint_path;
    std::string trace_path;
    std::string report_path;
};

// Full pipeline: prepare, split, train, evaluate, write
// {out_dir}/model.ckpt, trace.tsv and report.txt.
ExperimentResult run_training_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Predicts every labeled pixel with a checkpointed model and renders the
// class map as binary PPM.
void render_map(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_image, std::ostream* log = nullptr);

struct SweepRow {
    std::string value;
    bool ok = false;
    std::string error;
    double oa = 0.0, aa = 0.0, kappa = 0.0;
};

// One experiment per value on the given axis ("fractions" or "epochs"),
// seeded seed+index. Failures are recorded per row and the sweep continues.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                const std::vector<std::string>& values, bool parallel = false,
                                std::ostream* log = nullptr);

std::string format_sweep_table(const std::string& axis, const std::vector<SweepRow>& rows);

struct ConvertSummary {
    std::size_t height = 0, width = 0, bands = 0, num_classes = 0;
    std::vector<std::size_t> histogram;  // index 0 = background
};

// Dense CSV (one pixel per row, band columns; labels one id per pixel) to
// the binary containers {out_prefix}.hsic / {out_prefix}.hsil.
ConvertSummary convert_csv_dataset(const std::string& cube_csv, const std::string& labels_csv,
                                   const std::string& out_prefix, std::size_t height,
                                   std::size_t width);

}  // namespace mgrnet
