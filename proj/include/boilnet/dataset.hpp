#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "boilnet/common.hpp"

namespace boilnet {

// Canonical column order of the on-disk dataset: 19 features, 4 targets,
// then the heat-flux case label. The order is part of the file format and
// must not change.
inline constexpr std::array<const char*, 19> kFeatureNames = {
    "dp_dx",     "dp_dy",     "dp_dz",     "d_ruu_dx", "d_ruv_dx", "d_ruw_dx", "d_ruv_dy",
    "d_rvv_dy",  "d_rvw_dy",  "d_ruw_dz",  "d_rvw_dz", "d_rww_dz", "d_rhu_dx", "d_rhv_dy",
    "d_rhw_dz",  "mu_t",      "q_total",   "n_site",   "t_act"};

inline constexpr std::array<const char*, 4> kTargetNames = {"q_evap", "q_single", "alpha_wall",
                                                            "t_sup"};

struct Sample {
    std::vector<double> features;
    std::vector<double> targets;
    double case_label = 0.0;
};

/// Per-column population mean and standard deviation, features first, then
/// targets. Fitted on training data only.
struct NormStats {
    std::vector<double> mean;
    std::vector<double> std_dev;

    std::size_t columns() const { return mean.size(); }
};

struct Dataset {
    std::vector<Sample> samples;
    bool normalized = false;
    std::optional<NormStats> stats;  // attached when normalized

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::size_t n_features() const { return samples.empty() ? 0 : samples.front().features.size(); }
    std::size_t n_targets() const { return samples.empty() ? 0 : samples.front().targets.size(); }

    void validate_uniform() const {
        if (samples.empty()) fail("dimension", "dataset is empty");
        const std::size_t nf = samples.front().features.size();
        const std::size_t ntg = samples.front().targets.size();
        for (const Sample& s : samples) {
            if (s.features.size() != nf || s.targets.size() != ntg) {
                fail("dimension", "dataset rows have inconsistent dimensionality");
            }
        }
    }

    /// The unique case label, when the dataset holds a single case.
    double case_label() const {
        if (samples.empty()) fail("dimension", "dataset is empty");
        const double label = samples.front().case_label;
        for (const Sample& s : samples) {
            if (s.case_label != label) fail("value", "dataset spans multiple case labels");
        }
        return label;
    }
};

inline double column_value(const Sample& s, std::size_t col) {
    return col < s.features.size() ? s.features[col] : s.targets[col - s.features.size()];
}

inline void set_column_value(Sample& s, std::size_t col, double v) {
    if (col < s.features.size()) {
        s.features[col] = v;
    } else {
        s.targets[col - s.features.size()] = v;
    }
}

/// Population mean/std per column over the training set. Columns with
/// vanishing spread get std 1 so normalization stays invertible.
inline NormStats fit_normalization(const Dataset& train) {
    if (train.empty()) fail("dimension", "fit_normalization: empty dataset");
    train.validate_uniform();
    const std::size_t cols = train.n_features() + train.n_targets();
    const double n = static_cast<double>(train.size());

    NormStats stats;
    stats.mean.assign(cols, 0.0);
    stats.std_dev.assign(cols, 0.0);
    for (const Sample& s : train.samples) {
        for (std::size_t c = 0; c < cols; ++c) {
            stats.mean[c] += column_value(s, c);
        }
    }
    for (double& m : stats.mean) m /= n;
    for (const Sample& s : train.samples) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = column_value(s, c) - stats.mean[c];
            stats.std_dev[c] += d * d;
        }
    }
    for (double& v : stats.std_dev) {
        v = std::sqrt(v / n);
        if (v < 1e-12) v = 1.0;  // degenerate-feature guard
    }
    return stats;
}

enum class NormDirection { Forward, Inverse };

/// (x - mean)/std per column, or the exact inverse. Test data must always be
/// transformed with statistics fitted on the training set.
inline Dataset apply_normalization(Dataset data, const NormStats& stats, NormDirection direction) {
    if (data.empty()) fail("dimension", "apply_normalization: empty dataset");
    data.validate_uniform();
    const std::size_t cols = data.n_features() + data.n_targets();
    if (stats.mean.size() != cols || stats.std_dev.size() != cols) {
        fail("dimension", "apply_normalization: stats have " + std::to_string(stats.mean.size()) +
                              " columns, dataset has " + std::to_string(cols));
    }
    if (direction == NormDirection::Forward && data.normalized) {
        fail("value", "apply_normalization: dataset is already normalized");
    }
    if (direction == NormDirection::Inverse && !data.normalized) {
        fail("value", "apply_normalization: dataset is not normalized");
    }

    for (Sample& s : data.samples) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = column_value(s, c);
            const double out = direction == NormDirection::Forward
                                   ? (v - stats.mean[c]) / stats.std_dev[c]
                                   : v * stats.std_dev[c] + stats.mean[c];
            set_column_value(s, c, out);
        }
    }
    if (direction == NormDirection::Forward) {
        data.normalized = true;
        data.stats = stats;
    } else {
        data.normalized = false;
        data.stats.reset();
    }
    return data;
}

inline std::string dataset_csv_header() {
    std::string h;
    for (const char* name : kFeatureNames) {
        h += name;
        h += ',';
    }
    for (const char* name : kTargetNames) {
        h += name;
        h += ',';
    }
    h += "case_label";
    return h;
}

/// Writes the fixed 24-column CSV (19 features, 4 targets, case_label).
inline void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
    data.validate_uniform();
    if (data.n_features() != kFeatureNames.size() || data.n_targets() != kTargetNames.size()) {
        fail("dimension", "write_dataset_csv: dataset is not in the 19-feature/4-target layout");
    }
    std::ofstream os(path);
    if (!os) fail("io", "cannot open for writing: " + path.string());
    os << dataset_csv_header() << '\n';
    for (const Sample& s : data.samples) {
        for (double v : s.features) os << format_double(v) << ',';
        for (double v : s.targets) os << format_double(v) << ',';
        os << format_double(s.case_label) << '\n';
    }
    if (!os) fail("io", "write failed: " + path.string());
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& text, const std::string& context) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        fail("format", context + ": not a number: '" + text + "'");
    }
    return v;
}

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) fail("io", "cannot open: " + path.string());

    std::string line;
    if (!std::getline(is, line)) fail("format", path.string() + ": missing header");
    const std::vector<std::string> header = split_csv_line(line);
    const std::size_t expected_cols = kFeatureNames.size() + kTargetNames.size() + 1;
    if (header.size() != expected_cols) {
        fail("format", path.string() + ": expected " + std::to_string(expected_cols) +
                           " columns, found " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < expected_cols; ++c) {
        const std::string expected = c < kFeatureNames.size() ? kFeatureNames[c]
                                     : c < kFeatureNames.size() + kTargetNames.size()
                                         ? kTargetNames[c - kFeatureNames.size()]
                                         : "case_label";
        if (header[c] != expected) {
            fail("format", path.string() + ": unexpected column '" + header[c] + "' at position " +
                               std::to_string(c) + " (expected '" + expected + "')");
        }
    }

    Dataset data;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != expected_cols) {
            fail("format", path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(expected_cols) + " fields, found " +
                               std::to_string(fields.size()));
        }
        Sample s;
        s.features.reserve(kFeatureNames.size());
        s.targets.reserve(kTargetNames.size());
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        for (std::size_t c = 0; c < kFeatureNames.size(); ++c) {
            s.features.push_back(parse_double(fields[c], ctx));
        }
        for (std::size_t c = 0; c < kTargetNames.size(); ++c) {
            s.targets.push_back(parse_double(fields[kFeatureNames.size() + c], ctx));
        }
        s.case_label = parse_double(fields.back(), ctx);
        data.samples.push_back(std::move(s));
    }
    if (data.empty()) fail("format", path.string() + ": no data rows");
    return data;
}

/// Concatenates datasets (raw, un-normalized) into one.
inline Dataset concat_datasets(const std::vector<Dataset>& parts) {
    Dataset out;
    for (const Dataset& p : parts) {
        if (p.normalized) fail("value", "concat_datasets: parts must be un-normalized");
        out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
    }
    if (out.empty()) fail("dimension", "concat_datasets: empty result");
    out.validate_uniform();
    return out;
}

}  // namespace boilnet
