#include "mgrnet/config.hpp"

#include <charconv>
#include <fstream>

#include "mgrnet/errors.hpp"
#include "mgrnet/model.hpp"

namespace mgrnet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw_config("config", "key '" + key + "': expected a non-negative integer, got '" + value + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || p != value.data() + value.size())
        throw_config("config", "key '" + key + "': expected an integer, got '" + value + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw_config("config", "key '" + key + "': expected a number, got '" + value + "'");
    }
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") cfg.dataset = value;
    else if (key == "cube") cfg.cube_path = value;
    else if (key == "labels") cfg.labels_path = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "pca_variance_target") cfg.pca_variance_target = parse_real(key, value);
    else if (key == "pca_cap") cfg.pca_cap = parse_size(key, value);
    else if (key == "patch_size") cfg.patch_size = parse_size(key, value);
    else if (key == "train_fraction") cfg.train_fraction = parse_real(key, value);
    else if (key == "variant") cfg.variant = (parse_variant(value), value);
    else if (key == "epochs") cfg.epochs = parse_size(key, value);
    else if (key == "batch_size") cfg.batch_size = parse_size(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_real(key, value);
    else if (key == "eval_every") cfg.eval_every = parse_size(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "conv_channels") cfg.conv_channels = parse_size(key, value);
    else if (key == "graph_channels") cfg.graph_channels = parse_size(key, value);
    else if (key == "residual_channels") cfg.residual_channels = parse_size(key, value);
    else throw_config("config", "unknown key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw_data("config", "cannot open '" + path + "'");
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw_config("config", path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            apply_config_entry(cfg, key, value);
        } catch (const Error& e) {
            throw Error(e.kind(), "config", path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

}  // namespace mgrnet
