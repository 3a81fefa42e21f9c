#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "boilnet/common.hpp"
#include "boilnet/dataset.hpp"
#include "boilnet/network.hpp"
#include "boilnet/optim.hpp"
#include "boilnet/rng.hpp"

namespace boilnet {

inline constexpr std::size_t kDefaultHistogramBins = 40;

// ---------------------------------------------------------------------------
// Leave-one-heat-flux-out splits
// ---------------------------------------------------------------------------

enum class SplitKind { Interpolation, Extrapolation };

struct CaseSplit {
    std::vector<double> train_labels;  // ascending
    double test_label = 0.0;
    SplitKind kind = SplitKind::Interpolation;
    int case_index = 0;  // 1-based, ordered by ascending test label
};

/// Each label serves as the test case once; testing on the extreme labels is
/// extrapolation, on the inner two interpolation.
inline std::vector<CaseSplit> make_splits(std::vector<double> labels) {
    if (labels.size() != 4) {
        fail("value", "make_splits: need exactly 4 case labels, got " +
                          std::to_string(labels.size()));
    }
    std::sort(labels.begin(), labels.end());
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (labels[i] == labels[i - 1]) fail("value", "make_splits: duplicate case label");
    }
    std::vector<CaseSplit> splits;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        CaseSplit s;
        s.test_label = labels[k];
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (j != k) s.train_labels.push_back(labels[j]);
        }
        s.kind = (k == 0 || k + 1 == labels.size()) ? SplitKind::Extrapolation
                                                    : SplitKind::Interpolation;
        s.case_index = static_cast<int>(k) + 1;
        splits.push_back(std::move(s));
    }
    return splits;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Per-column root mean square error. Rows are samples, columns QoIs; inputs
/// are expected in physical units.
inline Vec rmse_per_qoi(const Matrix& pred, const Matrix& truth) {
    if (!pred.same_shape(truth)) fail("dimension", "rmse_per_qoi: shape mismatch");
    if (pred.rows == 0) fail("dimension", "rmse_per_qoi: no samples");
    Vec rmse(pred.cols, 0.0);
    for (std::size_t i = 0; i < pred.rows; ++i) {
        for (std::size_t c = 0; c < pred.cols; ++c) {
            const double r = pred(i, c) - truth(i, c);
            rmse[c] += r * r;
        }
    }
    for (double& v : rmse) v = std::sqrt(v / static_cast<double>(pred.rows));
    return rmse;
}

struct TwoSigma {
    double sigma = 0.0;
    double coverage = 1.0;                // residuals within 2 sigma of the residual mean
    double coverage_zero_centered = 1.0;  // residuals within 2 sigma of zero
};

/// Population standard deviation of the residuals and the fraction inside the
/// 2-sigma band. With all residuals identical the coverage is defined as 1.
inline TwoSigma two_sigma_stats(const Vec& pred, const Vec& truth) {
    if (pred.size() != truth.size()) fail("dimension", "two_sigma_stats: length mismatch");
    if (pred.size() < 2) fail("dimension", "two_sigma_stats: need at least 2 samples");
    const double n = static_cast<double>(pred.size());

    double mean = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) mean += pred[i] - truth[i];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i] - mean;
        var += d * d;
    }

    TwoSigma out;
    out.sigma = std::sqrt(var / n);
    if (out.sigma == 0.0) {
        out.coverage = 1.0;
        out.coverage_zero_centered = 1.0;
        return out;
    }
    std::size_t in_band = 0, in_zero_band = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - truth[i];
        if (std::abs(r - mean) <= 2.0 * out.sigma) ++in_band;
        if (std::abs(r) <= 2.0 * out.sigma) ++in_zero_band;
    }
    out.coverage = static_cast<double>(in_band) / n;
    out.coverage_zero_centered = static_cast<double>(in_zero_band) / n;
    return out;
}

struct Histogram {
    std::vector<double> edges;        // n_bins + 1
    std::vector<std::size_t> counts;  // n_bins
    std::size_t underflow = 0;
    std::size_t overflow = 0;
};

/// Uniform bins over [lo, hi); the last bin is closed at hi. Out-of-range
/// values land in the underflow/overflow fields, so bin counts plus both
/// fields always sum to the input size.
inline Histogram histogram(const Vec& values, std::size_t n_bins, double lo, double hi) {
    if (n_bins < 1) fail("value", "histogram: need at least one bin");
    if (!(hi > lo)) fail("value", "histogram: empty range");
    Histogram h;
    h.edges.resize(n_bins + 1);
    const double width = (hi - lo) / static_cast<double>(n_bins);
    for (std::size_t b = 0; b <= n_bins; ++b) {
        h.edges[b] = lo + width * static_cast<double>(b);
    }
    h.edges.back() = hi;
    h.counts.assign(n_bins, 0);
    for (double v : values) {
        if (v < lo) {
            ++h.underflow;
        } else if (v > hi) {
            ++h.overflow;
        } else {
            std::size_t bin = v == hi ? n_bins - 1
                                      : static_cast<std::size_t>((v - lo) / width);
            if (bin >= n_bins) bin = n_bins - 1;
            ++h.counts[bin];
        }
    }
    return h;
}

// ---------------------------------------------------------------------------
// Linear baseline (ordinary least squares with a ridge jitter)
// ---------------------------------------------------------------------------

namespace detail {

/// In-place Cholesky factorization; throws when the matrix is not positive
/// definite even after the jitter.
inline void cholesky(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= a(i, k) * a(j, k);
            if (i == j) {
                if (sum <= 0.0) {
                    fail("value", "baseline_linear: normal equations not positive definite");
                }
                a(i, j) = std::sqrt(sum);
            } else {
                a(i, j) = sum / a(j, j);
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
    }
}

inline Vec cholesky_solve(const Matrix& l, Vec b) {
    const std::size_t n = l.rows;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * b[k];
        b[i] = sum / l(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= l(k, i) * b[k];
        b[i] = sum / l(i, i);
    }
    return b;
}

}  // namespace detail

/// Ordinary least squares from the features (plus intercept) to every QoI on
/// normalized data, reported as denormalized per-QoI test RMSE. Serves as the
/// independent anti-overclaim baseline for the network.
inline Vec baseline_linear(const Dataset& train_n, const Dataset& test_n) {
    if (!train_n.normalized || !test_n.normalized) {
        fail("value", "baseline_linear: datasets must be normalized");
    }
    if (!train_n.stats) fail("value", "baseline_linear: training stats missing");
    train_n.validate_uniform();
    test_n.validate_uniform();
    const std::size_t nf = train_n.n_features();
    const std::size_t ntg = train_n.n_targets();
    if (test_n.n_features() != nf || test_n.n_targets() != ntg) {
        fail("dimension", "baseline_linear: train/test dimensionality mismatch");
    }

    const std::size_t p = nf + 1;  // intercept column
    Matrix xtx(p, p, 0.0);
    Matrix xty(p, ntg, 0.0);
    Vec xi(p);
    for (const Sample& s : train_n.samples) {
        for (std::size_t f = 0; f < nf; ++f) xi[f] = s.features[f];
        xi[nf] = 1.0;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) xtx(a, b) += xi[a] * xi[b];
            for (std::size_t t = 0; t < ntg; ++t) xty(a, t) += xi[a] * s.targets[t];
        }
    }
    for (std::size_t a = 0; a < p; ++a) xtx(a, a) += 1e-8;

    detail::cholesky(xtx);
    Matrix coef(p, ntg, 0.0);
    for (std::size_t t = 0; t < ntg; ++t) {
        Vec rhs(p);
        for (std::size_t a = 0; a < p; ++a) rhs[a] = xty(a, t);
        const Vec beta = detail::cholesky_solve(xtx, std::move(rhs));
        for (std::size_t a = 0; a < p; ++a) coef(a, t) = beta[a];
    }

    const NormStats& stats = *train_n.stats;
    Vec rmse(ntg, 0.0);
    for (const Sample& s : test_n.samples) {
        for (std::size_t t = 0; t < ntg; ++t) {
            double pred = coef(nf, t);
            for (std::size_t f = 0; f < nf; ++f) pred += coef(f, t) * s.features[f];
            const double scale = stats.std_dev[nf + t];
            const double r = (pred - s.targets[t]) * scale;
            rmse[t] += r * r;
        }
    }
    for (double& v : rmse) v = std::sqrt(v / static_cast<double>(test_n.size()));
    return rmse;
}

// ---------------------------------------------------------------------------
// Latin hypercube sampling over (learning rate, hidden units, batch size)
// ---------------------------------------------------------------------------

struct HyperSetting {
    double epsilon = 1e-3;
    std::size_t hidden_units = 64;
    std::size_t batch_size = 256;
};

struct LhsPlan {
    std::size_t n_samples = 8;
    std::uint64_t seed = 1;
    double lr_lo = 1e-4, lr_hi = 1.0;           // sampled in log space
    std::size_t units_lo = 8, units_hi = 256;   // integer levels
    std::size_t batch_lo = 32, batch_hi = 2048; // integer levels
};

struct LhsSample {
    std::vector<HyperSetting> settings;
    Matrix strata;  // n_samples x 3 stratified uniforms in [0,1), for verification
};

/// One sample per stratum per dimension, with intra-stratum jitter and a
/// seeded permutation pairing strata across dimensions. The learning rate is
/// stratified in log space; integer dimensions are rounded after
/// stratification.
inline LhsSample lhs_sample(const LhsPlan& plan) {
    if (plan.n_samples < 2) fail("value", "lhs_sample: need at least 2 samples");
    if (!(plan.lr_lo > 0.0 && plan.lr_hi > plan.lr_lo)) {
        fail("value", "lhs_sample: dimension 'learning_rate' has an empty range");
    }
    if (plan.units_hi < plan.units_lo) {
        fail("value", "lhs_sample: dimension 'hidden_units' has an empty range");
    }
    if (plan.batch_hi < plan.batch_lo) {
        fail("value", "lhs_sample: dimension 'batch_size' has an empty range");
    }
    const std::size_t units_levels = plan.units_hi - plan.units_lo + 1;
    const std::size_t batch_levels = plan.batch_hi - plan.batch_lo + 1;
    if (units_levels < plan.n_samples) {
        fail("value", "lhs_sample: dimension 'hidden_units' has " + std::to_string(units_levels) +
                          " levels, fewer than " + std::to_string(plan.n_samples) + " samples");
    }
    if (batch_levels < plan.n_samples) {
        fail("value", "lhs_sample: dimension 'batch_size' has " + std::to_string(batch_levels) +
                          " levels, fewer than " + std::to_string(plan.n_samples) + " samples");
    }

    Rng rng(plan.seed);
    const std::size_t n = plan.n_samples;
    LhsSample out;
    out.strata = Matrix(n, 3, 0.0);
    for (std::size_t d = 0; d < 3; ++d) {
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        rng.shuffle(perm);
        for (std::size_t i = 0; i < n; ++i) {
            out.strata(i, d) =
                (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
        }
    }

    const double log_lo = std::log(plan.lr_lo);
    const double log_hi = std::log(plan.lr_hi);
    out.settings.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        HyperSetting& s = out.settings[i];
        s.epsilon = std::exp(log_lo + out.strata(i, 0) * (log_hi - log_lo));
        s.hidden_units = std::min(
            plan.units_hi,
            plan.units_lo + static_cast<std::size_t>(out.strata(i, 1) *
                                                     static_cast<double>(units_levels)));
        s.batch_size = std::min(
            plan.batch_hi,
            plan.batch_lo + static_cast<std::size_t>(out.strata(i, 2) *
                                                     static_cast<double>(batch_levels)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    std::size_t epochs = 40;
    std::size_t hidden_layers = 3;
    double lambda = 1e-4;
    std::uint64_t seed = 1;
};

struct SweepRow {
    std::size_t plan_index = 0;
    HyperSetting setting;
    Vec rmse;          // per QoI, physical units; +inf when diverged
    double mean_rmse = std::numeric_limits<double>::infinity();
    bool diverged = false;
};

/// Trains one network per setting and records per-QoI and mean test RMSE.
/// Divergent runs are kept in the table with a flag instead of being dropped.
inline std::vector<SweepRow> run_sweep(const std::vector<HyperSetting>& settings,
                                       const Dataset& train_n, const Dataset& test_n,
                                       const SweepConfig& cfg) {
    if (settings.empty()) fail("value", "run_sweep: no settings");
    std::vector<SweepRow> rows;
    rows.reserve(settings.size());
    const std::size_t ntg = train_n.n_targets();

    for (std::size_t i = 0; i < settings.size(); ++i) {
        SweepRow row;
        row.plan_index = i;
        row.setting = settings[i];

        std::vector<std::size_t> widths;
        widths.push_back(train_n.n_features());
        for (std::size_t l = 0; l < cfg.hidden_layers; ++l) widths.push_back(settings[i].hidden_units);
        widths.push_back(ntg);

        Rng rng(derive_seed(cfg.seed, i));
        Network net = make_network(widths, rng);

        TrainConfig tc;
        tc.epochs = cfg.epochs;
        tc.batch_size = std::min(settings[i].batch_size, train_n.size());
        tc.optimizer = OptimizerKind::Adam;
        tc.epsilon = settings[i].epsilon;
        tc.loss = LossConfig{Norm::L2, cfg.lambda, Norm::L2};
        tc.seed = derive_seed(cfg.seed, 1000 + i);

        try {
            train(net, train_n, test_n, tc);
            row.rmse = detail::evaluate_test_rmse(net, test_n);
            double mean = 0.0;
            for (double v : row.rmse) mean += v;
            row.mean_rmse = mean / static_cast<double>(row.rmse.size());
            if (!std::isfinite(row.mean_rmse)) {
                row.diverged = true;
                row.rmse.assign(ntg, std::numeric_limits<double>::infinity());
                row.mean_rmse = std::numeric_limits<double>::infinity();
            }
        } catch (const Error& e) {
            if (e.category() != "divergence") throw;
            row.diverged = true;
            row.rmse.assign(ntg, std::numeric_limits<double>::infinity());
            row.mean_rmse = std::numeric_limits<double>::infinity();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Sweep table sorted by mean RMSE (divergent rows last).
inline void write_sweep_csv(const std::filesystem::path& path, std::vector<SweepRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.diverged != b.diverged) return !a.diverged;
        if (a.mean_rmse != b.mean_rmse) return a.mean_rmse < b.mean_rmse;
        return a.plan_index < b.plan_index;
    });
    std::ofstream os(path);
    if (!os) fail("io", "cannot open for writing: " + path.string());
    os << "rank,plan_index,epsilon,hidden_units,batch_size,diverged,"
       << "rmse_q_evap,rmse_q_single,rmse_alpha_wall,rmse_t_sup,mean_rmse\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const SweepRow& row = rows[r];
        if (row.rmse.size() != 4) fail("dimension", "write_sweep_csv: expected 4 QoIs");
        os << (r + 1) << ',' << row.plan_index << ',' << format_double(row.setting.epsilon) << ','
           << row.setting.hidden_units << ',' << row.setting.batch_size << ','
           << (row.diverged ? 1 : 0);
        for (double v : row.rmse) os << ',' << format_double(v);
        os << ',' << format_double(row.mean_rmse) << '\n';
    }
    if (!os) fail("io", "write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Evaluation report
// ---------------------------------------------------------------------------

struct QoiStats {
    double rmse = 0.0;
    double sigma = 0.0;
    double coverage = 1.0;
    double coverage_zero_centered = 1.0;
};

struct EvalReport {
    double case_label = 0.0;
    std::size_t n_samples = 0;
    std::vector<QoiStats> qoi;  // dataset target order
    std::optional<Vec> baseline_rmse;
    std::vector<Histogram> truth_hist, pred_hist;
    std::size_t map_side = 0;  // 0 when the test set is not grid shaped
    std::vector<Vec> pred_phys, truth_phys;  // per QoI, one value per sample
};

/// Evaluates a trained network on a normalized test set: denormalized per-QoI
/// RMSE, residual sigma with 2-sigma coverage, value histograms, and (when
/// the sample count is a perfect square) grid-ordered surface maps.
inline EvalReport evaluate_network(const Network& net, const Dataset& test_n) {
    if (!test_n.normalized || !test_n.stats) {
        fail("value", "evaluate_network: test data must be normalized with training stats");
    }
    test_n.validate_uniform();
    if (test_n.size() < 2) fail("dimension", "evaluate_network: need at least 2 samples");
    const std::size_t ntg = test_n.n_targets();
    const std::size_t nf = test_n.n_features();
    if (net.input_width() != nf || net.output_width() != ntg) {
        fail("dimension", "evaluate_network: network does not match the dataset");
    }

    EvalReport report;
    report.n_samples = test_n.size();
    {
        const double first = test_n.samples.front().case_label;
        bool uniform = true;
        for (const Sample& s : test_n.samples) uniform = uniform && s.case_label == first;
        report.case_label = uniform ? first : 0.0;
    }

    const NormStats& stats = *test_n.stats;
    report.pred_phys.assign(ntg, Vec(test_n.size()));
    report.truth_phys.assign(ntg, Vec(test_n.size()));

    const std::size_t chunk = 512;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < test_n.size(); start += chunk) {
        const std::size_t end = std::min(test_n.size(), start + chunk);
        idx.resize(end - start);
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
        const Matrix x = detail::gather_features(test_n, idx);
        const Matrix y_hat = forward_batch(net, x, nullptr);
        for (std::size_t t = 0; t < ntg; ++t) {
            const double mean = stats.mean[nf + t];
            const double scale = stats.std_dev[nf + t];
            for (std::size_t b = 0; b < idx.size(); ++b) {
                report.pred_phys[t][start + b] = y_hat(t, b) * scale + mean;
                report.truth_phys[t][start + b] =
                    test_n.samples[start + b].targets[t] * scale + mean;
            }
        }
    }

    report.qoi.resize(ntg);
    report.truth_hist.resize(ntg);
    report.pred_hist.resize(ntg);
    for (std::size_t t = 0; t < ntg; ++t) {
        const Vec& pred = report.pred_phys[t];
        const Vec& truth = report.truth_phys[t];
        double sse = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double r = pred[i] - truth[i];
            sse += r * r;
        }
        QoiStats& q = report.qoi[t];
        q.rmse = std::sqrt(sse / static_cast<double>(pred.size()));
        const TwoSigma ts = two_sigma_stats(pred, truth);
        q.sigma = ts.sigma;
        q.coverage = ts.coverage;
        q.coverage_zero_centered = ts.coverage_zero_centered;

        double lo = truth[0], hi = truth[0];
        for (double v : truth) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double v : pred) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (!(hi > lo)) hi = lo + 1.0;
        report.truth_hist[t] = histogram(truth, kDefaultHistogramBins, lo, hi);
        report.pred_hist[t] = histogram(pred, kDefaultHistogramBins, lo, hi);
    }

    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(test_n.size()))));
    if (side * side == test_n.size()) report.map_side = side;
    return report;
}

/// Writes the paired prediction/truth/error grids of one QoI as CSV matrices.
inline void write_surface_maps(const std::filesystem::path& dir, const std::string& qoi,
                               const Vec& pred, const Vec& truth) {
    if (pred.size() != truth.size()) fail("dimension", "write_surface_maps: length mismatch");
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(pred.size()))));
    if (side == 0 || side * side != pred.size()) {
        fail("dimension", "write_surface_maps: test set of " + std::to_string(pred.size()) +
                              " samples is not grid shaped");
    }
    auto write_grid = [&](const std::string& suffix, auto&& value) {
        const std::filesystem::path path = dir / ("maps_" + qoi + "_" + suffix + ".csv");
        std::ofstream os(path);
        if (!os) fail("io", "cannot open for writing: " + path.string());
        for (std::size_t i = 0; i < side; ++i) {
            for (std::size_t j = 0; j < side; ++j) {
                if (j > 0) os << ',';
                os << format_double(value(i * side + j));
            }
            os << '\n';
        }
        if (!os) fail("io", "write failed: " + path.string());
    };
    write_grid("pred", [&](std::size_t i) { return pred[i]; });
    write_grid("truth", [&](std::size_t i) { return truth[i]; });
    write_grid("err", [&](std::size_t i) { return pred[i] - truth[i]; });
}

/// Emits report.json, histograms.csv, and the per-QoI map files.
inline void write_report(const std::filesystem::path& dir, const EvalReport& report) {
    if (report.qoi.size() != kTargetNames.size()) {
        fail("dimension", "write_report: expected the 4-QoI layout");
    }
    if (report.map_side == 0) {
        fail("dimension", "write_report: test set of " + std::to_string(report.n_samples) +
                              " samples is not grid shaped");
    }
    std::filesystem::create_directories(dir);

    nlohmann::json j;
    j["case_label"] = report.case_label;
    j["n_samples"] = report.n_samples;
    nlohmann::json qois;
    for (std::size_t t = 0; t < report.qoi.size(); ++t) {
        nlohmann::json q;
        q["rmse"] = report.qoi[t].rmse;
        q["sigma"] = report.qoi[t].sigma;
        q["coverage_mean_centered"] = report.qoi[t].coverage;
        q["coverage_zero_centered"] = report.qoi[t].coverage_zero_centered;
        if (report.baseline_rmse) {
            q["baseline_rmse"] = (*report.baseline_rmse)[t];
        } else {
            q["baseline_rmse"] = nullptr;
        }
        qois[kTargetNames[t]] = std::move(q);
    }
    j["qois"] = std::move(qois);
    // Table layout: alpha_wall, T_sup, q_evap, q_single
    j["rmse_row"] = {{"alpha_wall", report.qoi[2].rmse},
                     {"T_sup_K", report.qoi[3].rmse},
                     {"q_Evap_W_m2", report.qoi[0].rmse},
                     {"q_Single_W_m2", report.qoi[1].rmse}};

    std::ofstream os(dir / "report.json");
    if (!os) fail("io", "cannot open for writing: " + (dir / "report.json").string());
    os << j.dump(2) << '\n';

    std::ofstream hs(dir / "histograms.csv");
    if (!hs) fail("io", "cannot open for writing: " + (dir / "histograms.csv").string());
    hs << "qoi,series,bin_index,lo,hi,count\n";
    for (std::size_t t = 0; t < report.qoi.size(); ++t) {
        auto emit = [&](const char* series, const Histogram& h) {
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                hs << kTargetNames[t] << ',' << series << ',' << b << ','
                   << format_double(h.edges[b]) << ',' << format_double(h.edges[b + 1]) << ','
                   << h.counts[b] << '\n';
            }
        };
        emit("truth", report.truth_hist[t]);
        emit("pred", report.pred_hist[t]);
    }

    for (std::size_t t = 0; t < report.qoi.size(); ++t) {
        write_surface_maps(dir, kTargetNames[t], report.pred_phys[t], report.truth_phys[t]);
    }
}

/// RMSE summary table, one row per case, in the conventional column order
/// (alpha_wall, T_sup, q_Evap, q_Single). Rows carry RMSEs in dataset target
/// order. Six significant digits; this is a summary, not a lossless store.
inline std::string rmse_table_csv(const std::vector<std::pair<std::string, Vec>>& rows) {
    auto fmt6 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    std::string out = "case,alpha_wall,T_sup_K,q_Evap_W_m2,q_Single_W_m2\n";
    for (const auto& [name, rmse] : rows) {
        if (rmse.size() != 4) fail("dimension", "rmse_table_csv: expected 4 QoIs");
        out += name;
        out += ',' + fmt6(rmse[2]) + ',' + fmt6(rmse[3]) + ',' + fmt6(rmse[0]) + ',' +
               fmt6(rmse[1]) + '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full split protocol
// ---------------------------------------------------------------------------

struct SplitResult {
    CaseSplit split;
    NormStats stats;
    Network net;
    TrainHistory history;
    EvalReport report;
};

/// Runs one leave-one-heat-flux-out case end to end: merge the three training
/// cases, fit normalization on them alone, train the network, evaluate on the
/// held-out case, and attach the linear-baseline RMSEs.
inline SplitResult run_split(const std::vector<Dataset>& cases_raw, const CaseSplit& split,
                             const std::vector<std::size_t>& hidden_widths,
                             const TrainConfig& cfg) {
    auto find_case = [&](double label) -> const Dataset& {
        for (const Dataset& d : cases_raw) {
            if (!d.empty() && d.samples.front().case_label == label) return d;
        }
        fail("value", "run_split: no case with label " + format_double(label));
    };

    std::vector<Dataset> train_parts;
    for (double label : split.train_labels) train_parts.push_back(find_case(label));
    Dataset train_raw = concat_datasets(train_parts);
    const Dataset& test_raw = find_case(split.test_label);

    SplitResult result;
    result.split = split;
    result.stats = fit_normalization(train_raw);
    Dataset train_n = apply_normalization(std::move(train_raw), result.stats, NormDirection::Forward);
    Dataset test_n = apply_normalization(test_raw, result.stats, NormDirection::Forward);

    std::vector<std::size_t> widths;
    widths.push_back(train_n.n_features());
    for (std::size_t w : hidden_widths) widths.push_back(w);
    widths.push_back(train_n.n_targets());

    Rng rng(derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(split.case_index)));
    result.net = make_network(widths, rng);
    result.history = train(result.net, train_n, test_n, cfg);
    result.report = evaluate_network(result.net, test_n);
    result.report.baseline_rmse = baseline_linear(train_n, test_n);
    return result;
}

}  // namespace boilnet
