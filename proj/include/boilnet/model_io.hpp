#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "boilnet/common.hpp"
#include "boilnet/dataset.hpp"
#include "boilnet/network.hpp"

namespace boilnet {

/// A trained network with the normalization statistics it was fitted under,
/// so it can be applied directly to raw physical features.
struct SavedModel {
    Network net;
    std::vector<double> feature_mean, feature_std;
    std::vector<double> target_mean, target_std;
};

inline SavedModel make_saved_model(const Network& net, const NormStats& stats) {
    const std::size_t nf = net.input_width();
    const std::size_t ntg = net.output_width();
    if (stats.columns() != nf + ntg) {
        fail("dimension", "model stats have " + std::to_string(stats.columns()) +
                              " columns, network needs " + std::to_string(nf + ntg));
    }
    SavedModel m;
    m.net = net;
    m.feature_mean.assign(stats.mean.begin(), stats.mean.begin() + static_cast<std::ptrdiff_t>(nf));
    m.feature_std.assign(stats.std_dev.begin(), stats.std_dev.begin() + static_cast<std::ptrdiff_t>(nf));
    m.target_mean.assign(stats.mean.begin() + static_cast<std::ptrdiff_t>(nf), stats.mean.end());
    m.target_std.assign(stats.std_dev.begin() + static_cast<std::ptrdiff_t>(nf), stats.std_dev.end());
    return m;
}

inline NormStats model_stats(const SavedModel& m) {
    NormStats stats;
    stats.mean = m.feature_mean;
    stats.mean.insert(stats.mean.end(), m.target_mean.begin(), m.target_mean.end());
    stats.std_dev = m.feature_std;
    stats.std_dev.insert(stats.std_dev.end(), m.target_std.begin(), m.target_std.end());
    return stats;
}

// Model JSON schema (field names are part of the format):
//   {alpha, output_activation, layers: [{rows, cols, weights, biases}],
//    feature_stats: {mean, std}, target_stats: {mean, std}}

inline nlohmann::json model_to_json(const SavedModel& m) {
    m.net.validate();
    nlohmann::json j;
    j["alpha"] = m.net.alpha;
    j["output_activation"] = m.net.output_activation == Activation::Identity ? "identity" : "elu";
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : m.net.layers) {
        layers.push_back({{"rows", l.weights.rows},
                          {"cols", l.weights.cols},
                          {"weights", l.weights.data},
                          {"biases", l.biases}});
    }
    j["layers"] = std::move(layers);
    j["feature_stats"] = {{"mean", m.feature_mean}, {"std", m.feature_std}};
    j["target_stats"] = {{"mean", m.target_mean}, {"std", m.target_std}};
    return j;
}

inline SavedModel model_from_json(const nlohmann::json& j) {
    SavedModel m;
    try {
        m.net.alpha = j.at("alpha").get<double>();
        const std::string out_act = j.at("output_activation").get<std::string>();
        if (out_act == "identity") {
            m.net.output_activation = Activation::Identity;
        } else if (out_act == "elu") {
            m.net.output_activation = Activation::Elu;
        } else {
            fail("format", "model: unknown output_activation '" + out_act + "'");
        }
        for (const nlohmann::json& lj : j.at("layers")) {
            Layer l;
            l.weights.rows = lj.at("rows").get<std::size_t>();
            l.weights.cols = lj.at("cols").get<std::size_t>();
            l.weights.data = lj.at("weights").get<std::vector<double>>();
            l.biases = lj.at("biases").get<std::vector<double>>();
            if (l.weights.data.size() != l.weights.rows * l.weights.cols) {
                fail("format", "model: layer weight count does not match rows*cols");
            }
            m.net.layers.push_back(std::move(l));
        }
        m.feature_mean = j.at("feature_stats").at("mean").get<std::vector<double>>();
        m.feature_std = j.at("feature_stats").at("std").get<std::vector<double>>();
        m.target_mean = j.at("target_stats").at("mean").get<std::vector<double>>();
        m.target_std = j.at("target_stats").at("std").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        fail("format", std::string("model: ") + e.what());
    }
    m.net.validate();
    if (m.feature_mean.size() != m.net.input_width() ||
        m.feature_std.size() != m.net.input_width() ||
        m.target_mean.size() != m.net.output_width() ||
        m.target_std.size() != m.net.output_width()) {
        fail("format", "model: stats lengths do not match network widths");
    }
    return m;
}

inline void save_model(const std::filesystem::path& path, const SavedModel& m) {
    std::ofstream os(path);
    if (!os) fail("io", "cannot open for writing: " + path.string());
    os << model_to_json(m).dump(2) << '\n';
    if (!os) fail("io", "write failed: " + path.string());
}

inline SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail("io", "cannot open: " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        fail("format", path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

/// Applies the model to raw physical features: normalize, forward pass,
/// denormalize.
inline Vec predict_raw(const SavedModel& m, const Vec& raw_features) {
    if (raw_features.size() != m.net.input_width()) {
        fail("dimension", "predict_raw: feature count mismatch");
    }
    Vec x(raw_features.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = (raw_features[i] - m.feature_mean[i]) / m.feature_std[i];
    }
    Vec y = forward(m.net, x).first;
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = y[i] * m.target_std[i] + m.target_mean[i];
    }
    return y;
}

}  // namespace boilnet
