#include "mgrnet/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>

#include "mgrnet/checkpoint.hpp"
#include "mgrnet/palette.hpp"
#include "mgrnet/parallel.hpp"

namespace mgrnet {

namespace fs = std::filesystem;

PreparedData prepare_data(const ExperimentConfig& cfg) {
    if (cfg.cube_path.empty() || cfg.labels_path.empty())
        throw_usage("experiment", "cube and labels paths are required");

    PreparedData prep;
    auto [cube, labels] = load_cube(cfg.cube_path, cfg.labels_path);
    prep.labels = std::move(labels);
    prep.preset = find_preset(cfg.dataset);
    if (prep.preset) validate_against_preset(cube, prep.labels, *prep.preset);

    std::size_t cap = cfg.pca_cap;
    if (cap == 0 && prep.preset) cap = prep.preset->pca_cap;
    prep.pca = fit_pca(cube, cfg.pca_variance_target, cap);
    auto reduced = std::make_shared<HsiCube>(apply_pca(cube, prep.pca));
    prep.all = extract_patches(reduced, prep.labels, cfg.patch_size);

    prep.model_cfg.classes = prep.labels.num_classes;
    prep.model_cfg.input_bands = prep.pca.dim;
    prep.model_cfg.patch_size = cfg.patch_size;
    prep.model_cfg.conv_channels = cfg.conv_channels;
    prep.model_cfg.graph_channels = cfg.graph_channels;
    prep.model_cfg.residual_channels = cfg.residual_channels;
    prep.model_cfg.variant = parse_variant(cfg.variant);
    prep.model_cfg.init_seed = cfg.seed;
    return prep;
}

ExperimentResult run_training_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    PreparedData prep = prepare_data(cfg);
    if (log)
        *log << "dataset " << (cfg.dataset.empty() ? "(unnamed)" : cfg.dataset) << ": "
             << prep.labels.height << "x" << prep.labels.width << ", " << prep.pca.bands
             << " bands -> " << prep.pca.dim << " after PCA (explained "
             << prep.pca.explained_ratio << "), " << prep.all.size() << " labeled pixels\n";

    SplitSpec split{cfg.train_fraction, cfg.seed};
    auto [train_set, test_set] = stratified_split(prep.all, split);
    if (test_set.empty())
        throw_data("experiment", "test set is empty at train fraction " +
                                     std::to_string(cfg.train_fraction));
    if (log) *log << "split: " << train_set.size() << " train / " << test_set.size() << " test\n";

    MgrnetModel model = MgrnetModel::build(prep.model_cfg);

    TrainConfig tc;
    tc.epochs = cfg.epochs;
    tc.batch_size = cfg.batch_size;
    tc.learning_rate = cfg.learning_rate;
    tc.eval_every = cfg.eval_every;
    tc.rng_seed = cfg.seed;

    ExperimentResult result;
    result.trace = train(model, train_set, tc, &test_set);
    result.report = evaluate(model, test_set);

    fs::create_directories(cfg.out_dir);
    result.checkpoint_path = (fs::path(cfg.out_dir) / "model.ckpt").string();
    result.trace_path = (fs::path(cfg.out_dir) / "trace.tsv").string();
    result.report_path = (fs::path(cfg.out_dir) / "report.txt").string();

    std::vector<std::pair<std::string, const Tensor*>> to_save;
    for (auto& [name, t] : model.named_params()) to_save.push_back({name, t});
    save_checkpoint(result.checkpoint_path, to_save);

    std::ofstream(result.trace_path) << format_trace(result.trace);
    std::ofstream(result.report_path)
        << result.report.to_text(prep.preset ? prep.preset->class_names
                                             : std::vector<std::string>{});

    if (log) {
        char line[128];
        std::snprintf(line, sizeof(line), "final OA %.6f  AA %.6f  Kappa %.6f\n",
                      result.report.oa, result.report.aa, result.report.kappa);
        *log << line;
    }
    return result;
}

void render_map(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                const std::string& out_image, std::ostream* log) {
    PreparedData prep = prepare_data(cfg);
    MgrnetModel model = MgrnetModel::build(prep.model_cfg);
    load_checkpoint(checkpoint_path, model.named_params());

    const std::vector<int> pred = predict_all(model, prep.all);
    const auto palette = class_palette(prep.labels.num_classes);
    std::vector<Rgb> image(prep.labels.height * prep.labels.width, Rgb{0, 0, 0});
    for (std::size_t i = 0; i < prep.all.size(); ++i) {
        const auto [y, x] = prep.all.coord(i);
        image[static_cast<std::size_t>(y) * prep.labels.width + x] =
            palette[static_cast<std::size_t>(pred[i]) + 1];
    }
    write_ppm(out_image, prep.labels.width, prep.labels.height, image);
    if (log)
        *log << "map: " << prep.labels.width << "x" << prep.labels.height << " -> " << out_image
             << "\n";
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::string& axis,
                                const std::vector<std::string>& values, bool parallel,
                                std::ostream* log) {
    if (axis != "fractions" && axis != "epochs")
        throw_usage("sweep", "axis must be 'fractions' or 'epochs', got '" + axis + "'");
    if (values.empty()) throw_usage("sweep", "sweep values must be non-empty");

    std::vector<SweepRow> rows(values.size());
    auto run_one = [&](std::size_t i) {
        SweepRow row;
        row.value = values[i];
        try {
            ExperimentConfig run_cfg = cfg;
            run_cfg.seed = cfg.seed + i;
            run_cfg.out_dir =
                (fs::path(cfg.out_dir) / ("sweep_" + axis + "_" + values[i])).string();
            if (axis == "fractions")
                apply_config_entry(run_cfg, "train_fraction", values[i]);
            else
                apply_config_entry(run_cfg, "epochs", values[i]);
            const ExperimentResult res = run_training_experiment(run_cfg, nullptr);
            row.ok = true;
            row.oa = res.report.oa;
            row.aa = res.report.aa;
            row.kappa = res.report.kappa;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rows[i] = std::move(row);
    };

    if (parallel) {
        parallel_chunks(values.size(), [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i) run_one(i);
        });
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            run_one(i);
            if (log && rows[i].ok)
                *log << axis << " " << rows[i].value << ": OA " << rows[i].oa << "\n";
        }
    }
    return rows;
}

std::string format_sweep_table(const std::string& axis, const std::vector<SweepRow>& rows) {
    std::string out = axis + "\tOA\tAA\tKappa\tstatus\n";
    char line[256];
    for (const auto& r : rows) {
        if (r.ok)
            std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\t%.6f\tok\n", r.value.c_str(), r.oa,
                          r.aa, r.kappa);
        else
            std::snprintf(line, sizeof(line), "%s\t-\t-\t-\tERROR %s\n", r.value.c_str(),
                          r.error.c_str());
        out += line;
    }
    return out;
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, std::size_t line_no,
                                   const std::string& file) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t next = line.find(',', pos);
        if (next == std::string::npos) next = line.size();
        std::string cell = line.substr(pos, next - pos);
        // trim
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t' || cell.front() == '\r'))
            cell.erase(cell.begin());
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.pop_back();
        if (!cell.empty()) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw_data("convert", file + ":" + std::to_string(line_no) +
                                          ": non-numeric cell '" + cell + "'");
            }
        } else if (next != line.size() || pos != line.size()) {
            throw_data("convert", file + ":" + std::to_string(line_no) + ": empty cell");
        }
        if (next == line.size()) break;
        pos = next + 1;
    }
    return out;
}

}  // namespace

ConvertSummary convert_csv_dataset(const std::string& cube_csv, const std::string& labels_csv,
                                   const std::string& out_prefix, std::size_t height,
                                   std::size_t width) {
    if (height == 0 || width == 0) throw_usage("convert", "height and width must be positive");
    const std::size_t pixels = height * width;

    std::ifstream cis(cube_csv);
    if (!cis) throw_data("convert", "cannot open '" + cube_csv + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(cis, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto vals = parse_csv_line(line, line_no, cube_csv);
        if (vals.empty()) continue;
        if (!rows.empty() && vals.size() != rows.front().size())
            throw_data("convert", cube_csv + ":" + std::to_string(line_no) + ": ragged row (" +
                                      std::to_string(vals.size()) + " cells, expected " +
                                      std::to_string(rows.front().size()) + ")");
        rows.push_back(std::move(vals));
    }
    if (rows.size() != pixels)
        throw_data("convert", cube_csv + ": " + std::to_string(rows.size()) +
                                  " pixel rows do not match " + std::to_string(height) + "x" +
                                  std::to_string(width));
    const std::size_t bands = rows.front().size();

    std::ifstream lis(labels_csv);
    if (!lis) throw_data("convert", "cannot open '" + labels_csv + "'");
    std::vector<long> label_vals;
    line_no = 0;
    while (std::getline(lis, line)) {
        ++line_no;
        for (double v : parse_csv_line(line, line_no, labels_csv)) {
            const long id = std::lround(v);
            if (v != static_cast<double>(id) || id < 0)
                throw_data("convert", labels_csv + ":" + std::to_string(line_no) +
                                          ": labels must be non-negative integers");
            label_vals.push_back(id);
        }
    }
    if (label_vals.size() != pixels)
        throw_data("convert", labels_csv + ": " + std::to_string(label_vals.size()) +
                                  " labels do not match " + std::to_string(pixels) + " pixels");

    HsiCube cube;
    cube.height = height;
    cube.width = width;
    cube.bands = bands;
    cube.values.resize(pixels * bands);
    for (std::size_t px = 0; px < pixels; ++px)
        for (std::size_t b = 0; b < bands; ++b)
            cube.values[b * pixels + px] = static_cast<float>(rows[px][b]);

    LabelRaster labels;
    labels.height = height;
    labels.width = width;
    labels.labels.resize(pixels);
    long max_label = 0;
    for (std::size_t px = 0; px < pixels; ++px) {
        if (label_vals[px] > 65535) throw_data("convert", "label id exceeds u16 range");
        labels.labels[px] = static_cast<std::uint16_t>(label_vals[px]);
        max_label = std::max(max_label, label_vals[px]);
    }
    labels.num_classes = static_cast<std::size_t>(max_label);

    save_cube(cube, out_prefix + ".hsic");
    save_labels(labels, out_prefix + ".hsil");

    ConvertSummary summary;
    summary.height = height;
    summary.width = width;
    summary.bands = bands;
    summary.num_classes = labels.num_classes;
    summary.histogram = labels.class_histogram();
    return summary;
}

}  // namespace mgrnet
