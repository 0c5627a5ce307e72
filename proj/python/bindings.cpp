#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "mgrnet/experiment.hpp"
#include "mgrnet/metrics.hpp"
#include "mgrnet/model.hpp"
#include "mgrnet/patches.hpp"
#include "mgrnet/pca.hpp"
#include "mgrnet/synthetic.hpp"
#include "mgrnet/tensor.hpp"
#include "mgrnet/train.hpp"

namespace py = pybind11;
using namespace mgrnet;

namespace {

using ArrayF64 = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor64 tensor_from_array(const ArrayF64& arr) {
    Shape shape;
    for (py::ssize_t i = 0; i < arr.ndim(); ++i)
        shape.push_back(static_cast<std::size_t>(arr.shape(i)));
    Tensor64 t(shape);
    std::copy(arr.data(), arr.data() + arr.size(), t.data.begin());
    return t;
}

py::array_t<double> array_from_tensor(const Tensor64& t) {
    std::vector<py::ssize_t> shape;
    for (std::size_t d : t.shape) shape.push_back(static_cast<py::ssize_t>(d));
    py::array_t<double> arr(shape);
    std::copy(t.data.begin(), t.data.end(), arr.mutable_data());
    return arr;
}

// Python-side cubes are [H, W, B]; internally bands are sequential planes.
HsiCube cube_from_array(const ArrayF64& arr) {
    if (arr.ndim() != 3) throw_structural("python", "cube must be [H, W, bands]");
    HsiCube cube;
    cube.height = static_cast<std::size_t>(arr.shape(0));
    cube.width = static_cast<std::size_t>(arr.shape(1));
    cube.bands = static_cast<std::size_t>(arr.shape(2));
    cube.values.resize(cube.pixels() * cube.bands);
    const double* src = arr.data();
    const std::size_t plane = cube.pixels();
    for (std::size_t px = 0; px < plane; ++px)
        for (std::size_t b = 0; b < cube.bands; ++b)
            cube.values[b * plane + px] = static_cast<float>(src[px * cube.bands + b]);
    return cube;
}

py::array_t<double> cube_to_array(const HsiCube& cube) {
    py::array_t<double> arr({static_cast<py::ssize_t>(cube.height),
                             static_cast<py::ssize_t>(cube.width),
                             static_cast<py::ssize_t>(cube.bands)});
    double* dst = arr.mutable_data();
    const std::size_t plane = cube.pixels();
    for (std::size_t px = 0; px < plane; ++px)
        for (std::size_t b = 0; b < cube.bands; ++b)
            dst[px * cube.bands + b] = cube.values[b * plane + px];
    return arr;
}

LabelRaster labels_from_array(const py::array_t<int, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) throw_structural("python", "labels must be [H, W]");
    LabelRaster labels;
    labels.height = static_cast<std::size_t>(arr.shape(0));
    labels.width = static_cast<std::size_t>(arr.shape(1));
    labels.labels.resize(labels.height * labels.width);
    int max_label = 0;
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
        const int v = arr.data()[i];
        if (v < 0 || v > 65535) throw_data("python", "label ids must be in [0, 65535]");
        labels.labels[i] = static_cast<std::uint16_t>(v);
        max_label = std::max(max_label, v);
    }
    labels.num_classes = static_cast<std::size_t>(max_label);
    return labels;
}

py::dict report_to_dict(const EvalReport& report) {
    py::dict d;
    d["oa"] = report.oa;
    d["aa"] = report.aa;
    d["kappa"] = report.kappa;
    d["total"] = report.total;
    py::array_t<std::int64_t> m({static_cast<py::ssize_t>(report.num_classes),
                                 static_cast<py::ssize_t>(report.num_classes)});
    std::copy(report.matrix.begin(), report.matrix.end(), m.mutable_data());
    d["confusion"] = m;
    d["per_class_recall"] = report.per_class_recall;
    return d;
}

Padding parse_padding(const std::string& name) {
    if (name == "same") return Padding::Same;
    if (name == "valid") return Padding::Valid;
    throw_config("python", "padding must be 'same' or 'valid'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "MGRNet core operations: tensor primitives, PCA, metrics and the "
              "training pipeline";

    py::register_exception<Error>(m, "MgrnetError");

    m.def(
        "softmax", [](const ArrayF64& x) { return array_from_tensor(softmax(tensor_from_array(x))); },
        py::arg("x"), "Numerically stable softmax of a 1-d array.");

    m.def(
        "relu", [](const ArrayF64& x) { return array_from_tensor(relu(tensor_from_array(x))); },
        py::arg("x"));

    m.def(
        "conv2d",
        [](const ArrayF64& x, const ArrayF64& kernel, const ArrayF64& bias,
           const std::string& padding) {
            return array_from_tensor(conv2d(tensor_from_array(x), tensor_from_array(kernel),
                                            tensor_from_array(bias), parse_padding(padding)));
        },
        py::arg("x"), py::arg("kernel"), py::arg("bias"), py::arg("padding") = "same",
        "2-d convolution of [C,H,W] with [O,C,k,k] kernels.");

    m.def(
        "adaptive_avg_pool",
        [](const ArrayF64& x, std::size_t out_g) {
            return array_from_tensor(adaptive_avg_pool(tensor_from_array(x), out_g));
        },
        py::arg("x"), py::arg("out_g"));

    py::class_<PcaModel>(m, "PcaModel")
        .def_readonly("bands", &PcaModel::bands)
        .def_readonly("dim", &PcaModel::dim)
        .def_readonly("explained_ratio", &PcaModel::explained_ratio)
        .def_property_readonly("mean",
                               [](const PcaModel& p) {
                                   py::array_t<double> arr(static_cast<py::ssize_t>(p.bands));
                                   std::copy(p.mean.begin(), p.mean.end(), arr.mutable_data());
                                   return arr;
                               })
        .def_property_readonly("components",
                               [](const PcaModel& p) {
                                   py::array_t<double> arr({static_cast<py::ssize_t>(p.bands),
                                                            static_cast<py::ssize_t>(p.dim)});
                                   std::copy(p.components.begin(), p.components.end(),
                                             arr.mutable_data());
                                   return arr;
                               })
        .def_property_readonly("eigenvalues", [](const PcaModel& p) {
            py::array_t<double> arr(static_cast<py::ssize_t>(p.eigenvalues.size()));
            std::copy(p.eigenvalues.begin(), p.eigenvalues.end(), arr.mutable_data());
            return arr;
        });

    m.def(
        "fit_pca",
        [](const ArrayF64& cube, double variance_target, std::size_t cap) {
            return fit_pca(cube_from_array(cube), variance_target, cap);
        },
        py::arg("cube"), py::arg("variance_target") = 0.9999, py::arg("cap") = 0,
        "Fit PCA on an [H, W, bands] cube.");

    m.def(
        "apply_pca",
        [](const ArrayF64& cube, const PcaModel& model) {
            return cube_to_array(apply_pca(cube_from_array(cube), model));
        },
        py::arg("cube"), py::arg("model"));

    m.def(
        "evaluate_metrics",
        [](const py::array_t<int, py::array::c_style | py::array::forcecast>& truth,
           const py::array_t<int, py::array::c_style | py::array::forcecast>& predicted,
           std::size_t num_classes) {
            std::vector<int> t(truth.data(), truth.data() + truth.size());
            std::vector<int> p(predicted.data(), predicted.data() + predicted.size());
            return report_to_dict(report_from_pairs(t, p, num_classes));
        },
        py::arg("truth"), py::arg("predicted"), py::arg("num_classes"),
        "Confusion matrix with OA, AA and Kappa from (true, predicted) pairs.");

    m.def(
        "make_synthetic",
        [](std::size_t height, std::size_t width, std::size_t bands, std::size_t classes,
           std::size_t labeled, double noise_sigma, std::uint64_t seed) {
            SyntheticSpec spec{height, width, bands, classes, labeled, noise_sigma, seed};
            auto [cube, labels] = make_synthetic(spec);
            py::array_t<int> larr({static_cast<py::ssize_t>(height),
                                   static_cast<py::ssize_t>(width)});
            for (std::size_t i = 0; i < labels.labels.size(); ++i)
                larr.mutable_data()[i] = labels.labels[i];
            return py::make_tuple(cube_to_array(cube), larr);
        },
        py::arg("height") = 15, py::arg("width") = 15, py::arg("bands") = 8,
        py::arg("classes") = 3, py::arg("labeled") = 200, py::arg("noise_sigma") = 0.05,
        py::arg("seed") = 7, "Spectrally separable toy dataset (cube, labels).");

    m.def(
        "write_dataset",
        [](const std::string& prefix, const ArrayF64& cube,
           const py::array_t<int, py::array::c_style | py::array::forcecast>& labels) {
            save_cube(cube_from_array(cube), prefix + ".hsic");
            save_labels(labels_from_array(labels), prefix + ".hsil");
        },
        py::arg("prefix"), py::arg("cube"), py::arg("labels"),
        "Write the binary cube/label containers used by the CLI.");

    m.def(
        "read_dataset",
        [](const std::string& prefix) {
            auto [cube, labels] = load_cube(prefix + ".hsic", prefix + ".hsil");
            py::array_t<int> larr({static_cast<py::ssize_t>(labels.height),
                                   static_cast<py::ssize_t>(labels.width)});
            for (std::size_t i = 0; i < labels.labels.size(); ++i)
                larr.mutable_data()[i] = labels.labels[i];
            return py::make_tuple(cube_to_array(cube), larr);
        },
        py::arg("prefix"));

    m.def(
        "run_experiment",
        [](const ArrayF64& cube,
           const py::array_t<int, py::array::c_style | py::array::forcecast>& labels,
           const py::dict& options) {
            auto shared = std::make_shared<HsiCube>(cube_from_array(cube));
            LabelRaster raster = labels_from_array(labels);

            ExperimentConfig cfg;
            cfg.epochs = 10;
            cfg.patch_size = 9;
            cfg.train_fraction = 0.5;
            cfg.conv_channels = 8;
            cfg.graph_channels = 16;
            cfg.residual_channels = 16;
            for (auto item : options)
                apply_config_entry(cfg, py::cast<std::string>(item.first),
                                   py::cast<std::string>(py::str(item.second)));

            const PcaModel pca = fit_pca(*shared, cfg.pca_variance_target, cfg.pca_cap);
            auto reduced = std::make_shared<HsiCube>(apply_pca(*shared, pca));
            const PatchSet all = extract_patches(reduced, raster, cfg.patch_size);
            auto [train_set, test_set] =
                stratified_split(all, SplitSpec{cfg.train_fraction, cfg.seed});

            ModelConfig mc;
            mc.classes = raster.num_classes;
            mc.input_bands = pca.dim;
            mc.patch_size = cfg.patch_size;
            mc.conv_channels = cfg.conv_channels;
            mc.graph_channels = cfg.graph_channels;
            mc.residual_channels = cfg.residual_channels;
            mc.variant = parse_variant(cfg.variant);
            mc.init_seed = cfg.seed;
            MgrnetModel model = MgrnetModel::build(mc);

            TrainConfig tc;
            tc.epochs = cfg.epochs;
            tc.batch_size = cfg.batch_size;
            tc.learning_rate = cfg.learning_rate;
            tc.eval_every = cfg.eval_every;
            tc.rng_seed = cfg.seed;
            const TrainTrace trace = train(model, train_set, tc, &test_set);
            const EvalReport report = evaluate(model, test_set);

            py::dict out = report_to_dict(report);
            out["pca_dim"] = pca.dim;
            out["train_size"] = train_set.size();
            out["test_size"] = test_set.size();
            out["epoch_loss"] = trace.epoch_loss;
            return out;
        },
        py::arg("cube"), py::arg("labels"), py::arg("options") = py::dict(),
        "PCA -> patches -> stratified split -> train -> evaluate. Options use "
        "the same keys as the CLI config file.");
}
