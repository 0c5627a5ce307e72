#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mgrnet/errors.hpp"
#include "mgrnet/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string dataset, cube, labels, variant, out;
    double train_fraction = -1.0;
    long epochs = -1;
    long long seed = -1;
    long patch_size = -1;
    double learning_rate = -1.0;
    long batch_size = -1;
    long eval_every = -1;
    long pca_cap = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "key = value configuration file");
    cmd->add_option("--dataset", f.dataset, "dataset preset name or label");
    cmd->add_option("--cube", f.cube, "cube container (.hsic)");
    cmd->add_option("--labels", f.labels, "label container (.hsil)");
    cmd->add_option("--variant", f.variant, "FULL, NC, NG, NR, G16, G36 or G64");
    cmd->add_option("--train-fraction", f.train_fraction, "stratified training fraction");
    cmd->add_option("--epochs", f.epochs, "training epochs");
    cmd->add_option("--seed", f.seed, "experiment seed");
    cmd->add_option("--out", f.out, "output directory (train/sweep) or file (map)");
    cmd->add_option("--patch-size", f.patch_size, "spatial patch extent (odd)");
    cmd->add_option("--learning-rate", f.learning_rate, "optimizer learning rate");
    cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
    cmd->add_option("--eval-every", f.eval_every, "test evaluation period in epochs");
    cmd->add_option("--pca-cap", f.pca_cap, "maximum retained PCA dimensions");
}

// Resolution order: defaults, then config file, then flags.
mgrnet::ExperimentConfig resolve_config(const CommonFlags& f) {
    mgrnet::ExperimentConfig cfg;
    if (!f.config_path.empty()) cfg = mgrnet::parse_config_file(f.config_path);
    using mgrnet::apply_config_entry;
    if (!f.dataset.empty()) apply_config_entry(cfg, "dataset", f.dataset);
    if (!f.cube.empty()) apply_config_entry(cfg, "cube", f.cube);
    if (!f.labels.empty()) apply_config_entry(cfg, "labels", f.labels);
    if (!f.variant.empty()) apply_config_entry(cfg, "variant", f.variant);
    if (f.train_fraction >= 0) cfg.train_fraction = f.train_fraction;
    if (f.epochs >= 0) cfg.epochs = static_cast<std::size_t>(f.epochs);
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    if (!f.out.empty()) cfg.out_dir = f.out;
    if (f.patch_size >= 0) cfg.patch_size = static_cast<std::size_t>(f.patch_size);
    if (f.learning_rate >= 0) cfg.learning_rate = f.learning_rate;
    if (f.batch_size >= 0) cfg.batch_size = static_cast<std::size_t>(f.batch_size);
    if (f.eval_every >= 0) cfg.eval_every = static_cast<std::size_t>(f.eval_every);
    if (f.pca_cap >= 0) cfg.pca_cap = static_cast<std::size_t>(f.pca_cap);
    return cfg;
}

int run(int argc, char** argv) {
    CLI::App app{"MGRNet hyperspectral classification experiments"};
    app.require_subcommand(1);

    // convert
    auto* convert = app.add_subcommand("convert", "CSV export -> binary containers");
    std::string cube_csv, labels_csv, out_prefix;
    std::size_t height = 0, width = 0;
    convert->add_option("--cube-csv", cube_csv, "pixel-per-row CSV of band values")->required();
    convert->add_option("--labels-csv", labels_csv, "per-pixel class ids")->required();
    convert->add_option("--height", height, "image height in pixels")->required();
    convert->add_option("--width", width, "image width in pixels")->required();
    convert->add_option("--out", out_prefix, "output path prefix")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train and evaluate one model");
    CommonFlags train_flags;
    add_common_flags(train_cmd, train_flags);

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "repeat the experiment along one axis");
    CommonFlags sweep_flags;
    add_common_flags(sweep_cmd, sweep_flags);
    std::string axis;
    std::vector<std::string> values;
    bool parallel = false;
    sweep_cmd->add_option("--axis", axis, "'fractions' or 'epochs'")->required();
    sweep_cmd->add_option("--values", values, "axis values")->required()->delimiter(',');
    sweep_cmd->add_flag("--parallel", parallel, "run sweep points concurrently");

    // map
    auto* map_cmd = app.add_subcommand("map", "render the classification map");
    CommonFlags map_flags;
    add_common_flags(map_cmd, map_flags);
    std::string checkpoint;
    map_cmd->add_option("--checkpoint", checkpoint, "trained model checkpoint")->required();

    CLI11_PARSE(app, argc, argv);

    if (convert->parsed()) {
        const auto summary =
            mgrnet::convert_csv_dataset(cube_csv, labels_csv, out_prefix, height, width);
        std::cout << "wrote " << out_prefix << ".hsic / .hsil: " << summary.height << "x"
                  << summary.width << "x" << summary.bands << ", " << summary.num_classes
                  << " classes\n";
        for (std::size_t c = 0; c < summary.histogram.size(); ++c)
            std::cout << (c == 0 ? "background" : "class " + std::to_string(c)) << "\t"
                      << summary.histogram[c] << "\n";
        return 0;
    }
    if (train_cmd->parsed()) {
        const auto cfg = resolve_config(train_flags);
        const auto result = mgrnet::run_training_experiment(cfg, &std::cout);
        std::cout << "artifacts: " << result.checkpoint_path << ", " << result.trace_path << ", "
                  << result.report_path << "\n";
        return 0;
    }
    if (sweep_cmd->parsed()) {
        const auto cfg = resolve_config(sweep_flags);
        const auto rows = mgrnet::run_sweep(cfg, axis, values, parallel, &std::cout);
        const std::string table = mgrnet::format_sweep_table(axis, rows);
        std::filesystem::create_directories(cfg.out_dir);
        const auto table_path = std::filesystem::path(cfg.out_dir) / "sweep.tsv";
        std::ofstream(table_path) << table;
        std::cout << table;
        std::cout << "table: " << table_path.string() << "\n";
        for (const auto& row : rows)
            if (!row.ok) return 2;
        return 0;
    }
    if (map_cmd->parsed()) {
        auto cfg = resolve_config(map_flags);
        std::string out_image = cfg.out_dir;
        if (map_flags.out.empty()) out_image = "map.ppm";
        mgrnet::render_map(cfg, checkpoint, out_image, &std::cout);
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mgrnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
