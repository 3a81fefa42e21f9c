// boilnet: wall-boiling surrogate pipeline.
// Subcommands: generate, average, extract, train, evaluate, hpsearch.
// Every stage is a pure function of its flags, config file, and seeds.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "boilnet/experiment.hpp"
#include "boilnet/model_io.hpp"
#include "boilnet/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace boilnet;

namespace {

struct TrainingOptions {
    std::vector<std::size_t> hidden{64, 64, 64};
    std::size_t epochs = 200;
    std::size_t batch_size = 256;
    std::string optimizer = "adam";
    double epsilon = 1e-3;
    double lambda = 1e-4;  // fixed default regularization coefficient
    double alpha = 1.0;
    std::uint64_t seed = 7;
};

struct HpsearchOptions {
    std::size_t n_samples = 8;
    std::uint64_t seed = 9;
    double lr_lo = 1e-4, lr_hi = 1.0;
    std::size_t units_lo = 8, units_hi = 256;
    std::size_t batch_lo = 32, batch_hi = 2048;
    std::size_t epochs = 60;
    double lambda = 1e-4;
    int split = 1;
};

struct PipelineConfig {
    std::string workspace = "workspace";
    std::vector<double> q_totals{600e3, 800e3, 1000e3, 1200e3};
    std::uint64_t base_seed = 42;
    GenConfig generation;  // grid/spacing/noise prototype
    AvgSpec averaging{0.25e-3, 0.1};
    TrainingOptions training;
    HpsearchOptions hpsearch;
};

json load_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) fail("config", "cannot open config: " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        fail("config", path.string() + ": " + e.what());
    }
    return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_training_json(const json& j, TrainingOptions& t) {
    maybe(j, "hidden", t.hidden);
    maybe(j, "epochs", t.epochs);
    maybe(j, "batch_size", t.batch_size);
    maybe(j, "optimizer", t.optimizer);
    maybe(j, "epsilon", t.epsilon);
    maybe(j, "lambda", t.lambda);
    maybe(j, "alpha", t.alpha);
    maybe(j, "seed", t.seed);
}

void apply_hpsearch_json(const json& j, HpsearchOptions& h) {
    maybe(j, "n_samples", h.n_samples);
    maybe(j, "seed", h.seed);
    if (j.contains("lr_range")) {
        h.lr_lo = j.at("lr_range").at(0).get<double>();
        h.lr_hi = j.at("lr_range").at(1).get<double>();
    }
    if (j.contains("units_range")) {
        h.units_lo = j.at("units_range").at(0).get<std::size_t>();
        h.units_hi = j.at("units_range").at(1).get<std::size_t>();
    }
    if (j.contains("batch_range")) {
        h.batch_lo = j.at("batch_range").at(0).get<std::size_t>();
        h.batch_hi = j.at("batch_range").at(1).get<std::size_t>();
    }
    maybe(j, "epochs", h.epochs);
    maybe(j, "lambda", h.lambda);
    maybe(j, "split", h.split);
}

PipelineConfig load_config(const std::string& path) {
    PipelineConfig cfg;
    if (path.empty()) return cfg;
    const json j = load_json(path);
    try {
        maybe(j, "workspace", cfg.workspace);
        if (j.contains("generation")) {
            const json& g = j.at("generation");
            maybe(g, "q_totals", cfg.q_totals);
            maybe(g, "base_seed", cfg.base_seed);
            if (g.contains("grid")) {
                cfg.generation.nx = g.at("grid").at(0).get<std::size_t>();
                cfg.generation.ny = g.at("grid").at(1).get<std::size_t>();
                cfg.generation.nz = g.at("grid").at(2).get<std::size_t>();
                cfg.generation.nt = g.at("grid").at(3).get<std::size_t>();
            }
            maybe(g, "dx", cfg.generation.dx);
            maybe(g, "dt", cfg.generation.dt);
            maybe(g, "noise_sigma", cfg.generation.noise_sigma);
            maybe(g, "n_sites", cfg.generation.n_sites);
            if (g.contains("t_act_range")) {
                cfg.generation.t_act_lo = g.at("t_act_range").at(0).get<double>();
                cfg.generation.t_act_hi = g.at("t_act_range").at(1).get<double>();
            }
        }
        if (j.contains("averaging")) {
            maybe(j.at("averaging"), "l", cfg.averaging.l);
            maybe(j.at("averaging"), "tau", cfg.averaging.tau);
        }
        if (j.contains("training")) apply_training_json(j.at("training"), cfg.training);
        if (j.contains("hpsearch")) apply_hpsearch_json(j.at("hpsearch"), cfg.hpsearch);
    } catch (const json::exception& e) {
        fail("config", path + ": " + e.what());
    }
    return cfg;
}

std::string case_dir_name(double q_total) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "case_%g", q_total / 1000.0);
    return buf;
}

TrainConfig to_train_config(const TrainingOptions& t) {
    TrainConfig cfg;
    cfg.epochs = t.epochs;
    cfg.batch_size = t.batch_size;
    if (t.optimizer == "adam") {
        cfg.optimizer = OptimizerKind::Adam;
    } else if (t.optimizer == "sgd") {
        cfg.optimizer = OptimizerKind::Sgd;
    } else {
        fail("config", "unknown optimizer '" + t.optimizer + "' (use adam or sgd)");
    }
    cfg.epsilon = t.epsilon;
    cfg.loss = LossConfig{Norm::L2, t.lambda, Norm::L2};
    cfg.seed = t.seed;
    return cfg;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_generate(const PipelineConfig& cfg) {
    const fs::path cases = fs::path(cfg.workspace) / "cases";
    const std::vector<CaseBundle> bundles =
        generate_suite(cfg.q_totals, cfg.base_seed, cfg.generation);
    for (const CaseBundle& b : bundles) {
        const fs::path dir = cases / case_dir_name(b.case_label);
        write_case_files(dir, b);
        std::cout << "wrote " << dir.string() << " (q_total " << b.case_label << " W/m2)\n";
    }
}

void cmd_average(const std::string& in_dir, const std::string& out_dir, const AvgSpec& spec,
                 double csv_dx, double csv_dt) {
    if (!fs::is_directory(in_dir)) fail("io", "not a directory: " + in_dir);
    fs::create_directories(out_dir);
    std::size_t n_fields = 0;
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const auto ext = entry.path().extension();
        if (ext == ".blfd" || ext == ".csv") inputs.push_back(entry.path());
    }
    std::sort(inputs.begin(), inputs.end());
    for (const fs::path& path : inputs) {
        Field4D f;
        if (path.extension() == ".csv") {
            // text alternative carries no spacing; it comes from the flags
            if (csv_dx <= 0.0 || csv_dt <= 0.0) {
                fail("config", "csv field input " + path.string() + " needs --dx and --dt");
            }
            f = read_field_csv(path, csv_dx, csv_dt, path.stem().string());
        } else {
            f = read_blfd_field(path);
        }
        const fs::path out = fs::path(out_dir) / (path.stem().string() + ".blfd");
        if (f.nz == 1) {
            write_blfd(out, average_surface(field_to_surface(f), spec));
        } else {
            write_blfd(out, average4d(f, spec));
        }
        ++n_fields;
    }
    if (n_fields == 0) fail("io", "no field files in " + in_dir);
    if (fs::exists(fs::path(in_dir) / "manifest.json")) {
        fs::copy_file(fs::path(in_dir) / "manifest.json", fs::path(out_dir) / "manifest.json",
                      fs::copy_options::overwrite_existing);
    }
    std::cout << "averaged " << n_fields << " fields into " << out_dir << "\n";
}

void cmd_extract(const std::string& in_dir, const std::string& out_csv, double label_flag) {
    const fs::path dir(in_dir);
    if (!fs::is_directory(dir)) fail("io", "not a directory: " + in_dir);

    double label = label_flag;
    if (label <= 0.0) {
        const fs::path manifest = dir / "manifest.json";
        if (!fs::exists(manifest)) {
            fail("config", "no --label given and no manifest.json in " + in_dir);
        }
        label = load_json(manifest).at("q_total").get<double>();
    }

    auto volume = [&](const std::string& name) { return read_blfd_field(dir / (name + ".blfd")); };
    auto surface = [&](const std::string& name) {
        return read_blfd_surface(dir / (name + ".blfd"));
    };

    AveragedCase c;
    c.phi = volume("phi");
    c.p = volume("p");
    c.u = volume("u");
    c.v = volume("v");
    c.w = volume("w");
    c.rho = volume("rho");
    c.h = volume("h");
    c.mu_t = volume("mu_t");
    c.q_evap = surface("q_evap");
    c.q_single = surface("q_single");
    c.t_sup = surface("t_sup");
    c.n_site = surface("n_site");
    c.t_act = surface("t_act");
    c.q_total = surface("q_total");
    c.case_label = label;

    const Dataset data = build_case_dataset(c);
    write_dataset_csv(out_csv, data);
    std::cout << "extracted " << data.size() << " samples to " << out_csv << "\n";
}

void cmd_train(const std::vector<std::string>& train_csvs, const std::string& test_csv,
               const std::string& hyper_path, const std::string& model_path,
               const std::string& history_path, TrainingOptions opts,
               std::optional<std::uint64_t> seed_override) {
    if (!hyper_path.empty()) apply_training_json(load_json(hyper_path), opts);
    if (seed_override) opts.seed = *seed_override;

    std::vector<Dataset> parts;
    for (const std::string& path : train_csvs) parts.push_back(read_dataset_csv(path));
    Dataset train_raw = concat_datasets(parts);
    const Dataset test_raw = read_dataset_csv(test_csv);

    const NormStats stats = fit_normalization(train_raw);
    const Dataset train_n = apply_normalization(std::move(train_raw), stats, NormDirection::Forward);
    const Dataset test_n = apply_normalization(test_raw, stats, NormDirection::Forward);

    std::vector<std::size_t> widths;
    widths.push_back(train_n.n_features());
    for (std::size_t w : opts.hidden) widths.push_back(w);
    widths.push_back(train_n.n_targets());

    Rng rng(derive_seed(opts.seed, 1));
    Network net = make_network(widths, rng, opts.alpha);
    const TrainConfig cfg = to_train_config(opts);
    const TrainHistory history = train(net, train_n, test_n, cfg);

    save_model(model_path, make_saved_model(net, stats));
    if (!history_path.empty()) write_history_csv(history_path, history);
    std::cout << "trained on " << train_n.size() << " samples; final objective "
              << format_double(history.records.back().train_objective) << "; model " << model_path
              << "\n";
}

void cmd_evaluate(const std::string& model_path, const std::string& test_csv,
                  const std::string& out_dir, const std::vector<std::string>& train_csvs) {
    const SavedModel model = load_model(model_path);
    const Dataset test_raw = read_dataset_csv(test_csv);
    const NormStats stats = model_stats(model);
    const Dataset test_n = apply_normalization(test_raw, stats, NormDirection::Forward);

    EvalReport report = evaluate_network(model.net, test_n);
    if (!train_csvs.empty()) {
        std::vector<Dataset> parts;
        for (const std::string& path : train_csvs) parts.push_back(read_dataset_csv(path));
        const Dataset train_n =
            apply_normalization(concat_datasets(parts), stats, NormDirection::Forward);
        report.baseline_rmse = baseline_linear(train_n, test_n);
    }
    write_report(out_dir, report);
    std::cout << "report written to " << out_dir << " (";
    for (std::size_t t = 0; t < report.qoi.size(); ++t) {
        std::cout << (t ? ", " : "") << kTargetNames[t] << " rmse "
                  << format_double(report.qoi[t].rmse);
    }
    std::cout << ")\n";
}

void cmd_hpsearch(const std::string& plan_path, const std::string& data_dir,
                  std::optional<int> split_flag, const std::string& out_csv,
                  HpsearchOptions opts) {
    if (!plan_path.empty()) apply_hpsearch_json(load_json(plan_path), opts);
    if (split_flag) opts.split = *split_flag;
    if (opts.split < 1 || opts.split > 4) fail("config", "split must be in 1..4");

    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(data_dir)) {
        if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
    if (csvs.size() != 4) {
        fail("io", "expected 4 case CSVs in " + data_dir + ", found " + std::to_string(csvs.size()));
    }
    std::vector<Dataset> cases;
    std::vector<double> labels;
    for (const fs::path& p : csvs) {
        cases.push_back(read_dataset_csv(p));
        labels.push_back(cases.back().case_label());
    }

    const CaseSplit split = make_splits({labels[0], labels[1], labels[2], labels[3]})
        [static_cast<std::size_t>(opts.split - 1)];
    std::vector<Dataset> train_parts;
    const Dataset* test_raw = nullptr;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (labels[i] == split.test_label) {
            test_raw = &cases[i];
        } else {
            train_parts.push_back(cases[i]);
        }
    }
    Dataset train_raw = concat_datasets(train_parts);
    const NormStats stats = fit_normalization(train_raw);
    const Dataset train_n = apply_normalization(std::move(train_raw), stats, NormDirection::Forward);
    const Dataset test_n = apply_normalization(*test_raw, stats, NormDirection::Forward);

    LhsPlan plan;
    plan.n_samples = opts.n_samples;
    plan.seed = opts.seed;
    plan.lr_lo = opts.lr_lo;
    plan.lr_hi = opts.lr_hi;
    plan.units_lo = opts.units_lo;
    plan.units_hi = opts.units_hi;
    plan.batch_lo = opts.batch_lo;
    plan.batch_hi = opts.batch_hi;
    const LhsSample lhs = lhs_sample(plan);

    SweepConfig cfg;
    cfg.epochs = opts.epochs;
    cfg.lambda = opts.lambda;
    cfg.seed = derive_seed(opts.seed, 2);
    const std::vector<SweepRow> rows = run_sweep(lhs.settings, train_n, test_n, cfg);
    write_sweep_csv(out_csv, rows);
    std::cout << "sweep of " << rows.size() << " settings written to " << out_csv << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wall-boiling surrogate pipeline: synthetic fields, space-time averaging, "
                 "feature extraction, network training, and evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string workspace_override;
    app.add_option("--config", config_path, "pipeline config JSON");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--workspace", workspace_override, "override the workspace directory");

    auto* generate = app.add_subcommand("generate", "generate the synthetic heat-flux cases");

    auto* average = app.add_subcommand("average", "space-time average the fields of one case");
    std::string avg_in, avg_out;
    double avg_l = 0.0, avg_tau = 0.0;
    average->add_option("--in", avg_in, "case directory with .blfd fields")->required();
    average->add_option("--out", avg_out, "output directory")->required();
    average->add_option("--l", avg_l, "averaging length scale in meters");
    average->add_option("--tau", avg_tau, "averaging time scale in seconds");
    double avg_dx = 0.0, avg_dt = 0.0;
    average->add_option("--dx", avg_dx, "grid spacing for csv field inputs");
    average->add_option("--dt", avg_dt, "frame spacing for csv field inputs");

    auto* extract = app.add_subcommand("extract", "build the feature/target CSV of one case");
    std::string ext_in, ext_out;
    double ext_label = 0.0;
    extract->add_option("--in", ext_in, "averaged case directory")->required();
    extract->add_option("--out", ext_out, "output dataset CSV")->required();
    extract->add_option("--label", ext_label, "heat-flux case label in W/m2");

    auto* train_cmd = app.add_subcommand("train", "train a network on case CSVs");
    std::vector<std::string> train_csvs;
    std::string test_csv, hyper_path, model_out, history_out;
    train_cmd->add_option("--train", train_csvs, "training case CSVs")->required()->expected(-1);
    train_cmd->add_option("--test", test_csv, "held-out test CSV")->required();
    train_cmd->add_option("--hyper", hyper_path, "hyperparameter JSON");
    train_cmd->add_option("--out", model_out, "output model JSON")->required();
    train_cmd->add_option("--history", history_out, "training history CSV");

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a model on a test CSV");
    std::string eval_model, eval_test, eval_out;
    std::vector<std::string> eval_train;
    evaluate->add_option("--model", eval_model, "model JSON")->required();
    evaluate->add_option("--test", eval_test, "test CSV")->required();
    evaluate->add_option("--out", eval_out, "report output directory")->required();
    evaluate->add_option("--train", eval_train,
                         "training CSVs (enables the linear-baseline comparison)");

    auto* hpsearch = app.add_subcommand("hpsearch", "latin hypercube hyperparameter sweep");
    std::string plan_path, data_dir, sweep_out;
    std::optional<int> split_flag;
    hpsearch->add_option("--plan", plan_path, "sweep plan JSON");
    hpsearch->add_option("--data", data_dir, "directory with the 4 case CSVs")->required();
    hpsearch->add_option("--split", split_flag, "leave-one-out case index (1..4)");
    hpsearch->add_option("--out", sweep_out, "output sweep CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg = load_config(config_path);
        if (seed_override) cfg.base_seed = *seed_override;
        if (!workspace_override.empty()) cfg.workspace = workspace_override;

        if (generate->parsed()) {
            cmd_generate(cfg);
        } else if (average->parsed()) {
            AvgSpec spec = cfg.averaging;
            if (avg_l > 0.0) spec.l = avg_l;
            if (avg_tau > 0.0) spec.tau = avg_tau;
            cmd_average(avg_in, avg_out, spec, avg_dx, avg_dt);
        } else if (extract->parsed()) {
            cmd_extract(ext_in, ext_out, ext_label);
        } else if (train_cmd->parsed()) {
            cmd_train(train_csvs, test_csv, hyper_path, model_out, history_out, cfg.training,
                      seed_override);
        } else if (evaluate->parsed()) {
            cmd_evaluate(eval_model, eval_test, eval_out, eval_train);
        } else if (hpsearch->parsed()) {
            cmd_hpsearch(plan_path, data_dir, split_flag, sweep_out, cfg.hpsearch);
        }
    } catch (const Error& e) {
        std::cerr << "error:" << e.category() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
