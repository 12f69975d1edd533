// Command-line front end: train/eval/ood/shift/baseline/synth subcommands
// over the dataset directory format, emitting results.json / results.csv
// (and history.csv from training) into --out.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpn/baselines.hpp"
#include "gpn/experiments.hpp"
#include "gpn/metrics.hpp"
#include "gpn/model.hpp"

namespace {

namespace fs = std::filesystem;

// Key-value text config: one "key value" or "key = value" per line, '#'
// comments. Unknown keys are rejected.
std::map<std::string, std::string> parse_config_file(const fs::path& path) {
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    if (!in) throw gpn::LoadError("cannot open config file: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        for (auto& ch : line) {
            if (ch == '=') ch = ' ';
        }
        std::istringstream ls(line);
        std::string key, value;
        if (!(ls >> key)) continue;
        if (!(ls >> value)) {
            throw gpn::LoadError("config line without a value: " + key);
        }
        kv[key] = value;
    }
    return kv;
}

struct Options {
    std::string data_dir;
    std::string config_file;
    std::string out_dir;
    std::string checkpoint;
    std::uint64_t seed = 0;
};

struct RunSettings {
    gpn::GpnConfig model;
    gpn::TrainConfig train;
    // synthetic-benchmark keys (synth subcommand)
    std::size_t n_per_class = 200;
    std::size_t num_classes = 4;
    std::size_t feature_dim = 8;
    double homophily = 0.8;
};

RunSettings load_settings(const Options& opts) {
    RunSettings s;
    if (opts.config_file.empty()) return s;
    const auto kv = parse_config_file(opts.config_file);
    for (const auto& [key, value] : kv) {
        if (key == "hidden_dim") s.model.hidden_dim = std::stoul(value);
        else if (key == "latent_dim") s.model.latent_dim = std::stoul(value);
        else if (key == "num_layers") s.model.num_layers = std::stoul(value);
        else if (key == "n_radial") s.model.n_radial = std::stoul(value);
        else if (key == "dropout") s.model.dropout_p = std::stod(value);
        else if (key == "teleport") s.model.teleport = std::stod(value);
        else if (key == "iterations") s.model.iterations = std::stoul(value);
        else if (key == "prior") s.model.prior_value = std::stod(value);
        else if (key == "encoder_bias") s.model.encoder_bias = value != "0" && value != "false";
        else if (key == "mode")
            s.model.mode = value == "row-stochastic" ? gpn::PropagationMode::row_stochastic
                                                     : gpn::PropagationMode::symmetric;
        else if (key == "budget")
            s.model.budget = value == "per-latent-times-classes"
                                 ? gpn::BudgetMode::per_latent_times_classes
                                 : gpn::BudgetMode::per_latent;
        else if (key == "entropy_weight") s.train.loss.entropy_weight = std::stod(value);
        else if (key == "lr") s.train.lr = std::stod(value);
        else if (key == "weight_decay") s.train.weight_decay = std::stod(value);
        else if (key == "max_epochs") s.train.schedule.max_epochs = std::stoul(value);
        else if (key == "patience") s.train.schedule.patience = std::stoul(value);
        else if (key == "warmup_epochs") s.train.schedule.warmup_epochs = std::stoul(value);
        else if (key == "n_per_class") s.n_per_class = std::stoul(value);
        else if (key == "num_classes") s.num_classes = std::stoul(value);
        else if (key == "feature_dim") s.feature_dim = std::stoul(value);
        else if (key == "homophily") s.homophily = std::stod(value);
        else throw gpn::ParameterError("unknown config key: " + key);
    }
    return s;
}

fs::path ensure_out_dir(const Options& opts) {
    const fs::path dir = opts.out_dir.empty() ? fs::path(".") : fs::path(opts.out_dir);
    fs::create_directories(dir);
    return dir;
}

void emit(const fs::path& dir, const std::vector<gpn::ResultRecord>& records) {
    gpn::write_results_json(dir / "results.json", records);
    gpn::write_results_csv(dir / "results.csv", records);
    for (const auto& record : records) {
        std::cout << record.name;
        for (const auto& [metric, value] : record.metrics) {
            std::cout << "  " << metric << "=" << value;
        }
        std::cout << '\n';
    }
}

gpn::GpnModel train_model(const gpn::Dataset& data, const gpn::SplitSpec& split,
                          RunSettings settings, std::uint64_t seed, const fs::path* history_out) {
    settings.model.input_dim = data.num_features();
    settings.model.num_classes = data.num_classes;
    settings.model.init_seed = seed;
    settings.train.schedule.seed = seed;
    auto model = gpn::GpnModel::init(settings.model);
    auto history = gpn::fit(model, data, split, settings.train);
    if (history_out) {
        gpn::write_history_csv(*history_out, history);
        std::cout << "trained " << history.train_loss.size() << " epochs, best val loss "
                  << history.best_val << " at epoch " << history.best_epoch << '\n';
    }
    return model;
}

std::vector<int> parse_class_list(const std::string& csv) {
    std::vector<int> classes;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) classes.push_back(std::stoi(item));
    }
    return classes;
}

std::vector<double> parse_level_list(const std::string& csv) {
    std::vector<double> levels;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) levels.push_back(std::stod(item));
    }
    return levels;
}

int cmd_synth(const Options& opts) {
    const auto settings = load_settings(opts);
    auto data = gpn::make_synthetic_benchmark(settings.n_per_class, settings.num_classes,
                                              settings.feature_dim, settings.homophily, opts.seed);
    const auto dir = ensure_out_dir(opts);
    gpn::save_dataset(data, dir);
    std::cout << "wrote synthetic dataset (" << data.num_nodes() << " nodes, "
              << data.graph.num_edges() << " edges) to " << dir << '\n';
    return 0;
}

int cmd_train(const Options& opts) {
    const auto settings = load_settings(opts);
    auto data = gpn::load_dataset(opts.data_dir);
    auto split = gpn::stratified_split(data, opts.seed);
    const auto dir = ensure_out_dir(opts);
    const fs::path history_path = dir / "history.csv";
    auto model = train_model(data, split, settings, opts.seed, &history_path);
    const fs::path ckpt =
        opts.checkpoint.empty() ? dir / "model.ckpt" : fs::path(opts.checkpoint);
    model.save_checkpoint(ckpt);
    std::cout << "checkpoint written to " << ckpt << '\n';
    emit(dir, {gpn::evaluate_clean(model, data, split)});
    return 0;
}

int cmd_eval(const Options& opts) {
    auto data = gpn::load_dataset(opts.data_dir);
    auto split = gpn::stratified_split(data, opts.seed);
    auto model = gpn::GpnModel::load_checkpoint(opts.checkpoint);
    emit(ensure_out_dir(opts), {gpn::evaluate_clean(model, data, split)});
    return 0;
}

int cmd_ood(const Options& opts, const std::string& kind_name, double fraction,
            const std::string& left_out_csv, const std::string& seeds_csv) {
    const auto settings = load_settings(opts);
    const auto data = gpn::load_dataset(opts.data_dir);
    const auto kind = gpn::ood_kind_from_string(kind_name);
    const auto left_out = parse_class_list(left_out_csv);

    auto run_one = [&](std::uint64_t seed) {
        auto split = gpn::stratified_split(data, seed);
        gpn::OodExperiment exp{kind, fraction, left_out, seed};
        gpn::GpnModel model = [&] {
            if (!opts.checkpoint.empty()) return gpn::GpnModel::load_checkpoint(opts.checkpoint);
            // LOC models must be trained with the left-out classes hidden
            if (kind == gpn::OodExperiment::Kind::left_out_classes) {
                auto view = gpn::left_out_class_setup(data, split, left_out);
                return train_model(view.data, view.split, settings, seed, nullptr);
            }
            return train_model(data, split, settings, seed, nullptr);
        }();
        return gpn::run_ood_experiment(model, data, split, exp);
    };

    if (seeds_csv.empty()) {
        emit(ensure_out_dir(opts), {run_one(opts.seed)});
        return 0;
    }
    std::vector<std::uint64_t> seeds;
    for (int s : parse_class_list(seeds_csv)) seeds.push_back(static_cast<std::uint64_t>(s));
    auto records = gpn::run_seeds_parallel(run_one, seeds);
    records.push_back(gpn::aggregate_records(records, "ood-" + kind_name + "-aggregate"));
    emit(ensure_out_dir(opts), records);
    return 0;
}

int cmd_shift(const Options& opts, const std::string& kind_name, const std::string& levels_csv) {
    auto data = gpn::load_dataset(opts.data_dir);
    auto split = gpn::stratified_split(data, opts.seed);
    auto model = gpn::GpnModel::load_checkpoint(opts.checkpoint);
    std::vector<double> levels(gpn::kDefaultShiftLevels.begin(), gpn::kDefaultShiftLevels.end());
    if (!levels_csv.empty()) levels = parse_level_list(levels_csv);
    auto records = gpn::run_shift_sweep(model, data, split, gpn::ood_kind_from_string(kind_name),
                                        levels, opts.seed);
    emit(ensure_out_dir(opts), records);
    return 0;
}

int cmd_baseline(const Options& opts, const std::string& method, const std::string& left_out_csv) {
    auto data = gpn::load_dataset(opts.data_dir);
    auto split = gpn::stratified_split(data, opts.seed);
    const auto left_out = parse_class_list(left_out_csv);
    std::vector<char> ood_mask;
    if (!left_out.empty()) {
        auto view = gpn::left_out_class_setup(data, split, left_out);
        data = std::move(view.data);
        split = std::move(view.split);
        ood_mask = std::move(view.ood_mask);
    }
    std::vector<std::size_t> labeled;
    for (std::size_t v = 0; v < data.num_nodes(); ++v) {
        if (split.train[v]) labeled.push_back(v);
    }
    const auto alpha = method == "gkde"
                           ? gpn::gkde_alpha(data.graph, data.labels, labeled, data.num_classes, {})
                           : gpn::lp_alpha(data.graph, data.labels, labeled, data.num_classes, {});

    gpn::ResultRecord record;
    record.name = "baseline-" + method;
    record.seed = opts.seed;
    record.config["method"] = method;
    record.config["dataset"] = data.name;
    gpn::DirichletPosterior post{alpha, 1.0};
    const auto preds = gpn::predict(post);
    const auto p = gpn::normalized_rows(alpha);
    const std::size_t n = data.num_nodes(), C = data.num_classes;
    record.metrics["test_acc"] = gpn::accuracy(preds, data.labels, split.test);
    record.metrics["brier"] = gpn::brier(gpn::Tensor::from({n, C}, p), data.labels, split.test);
    record.metrics["ece"] =
        gpn::ece(gpn::Tensor::from({n, C}, p), preds, data.labels, split.test);
    if (!ood_mask.empty()) {
        std::vector<double> epist(n);
        for (std::size_t v = 0; v < n; ++v) {
            double a0 = 0.0;
            for (std::size_t c = 0; c < C; ++c) a0 += alpha->at(v, c);
            epist[v] = -a0;
        }
        std::vector<double> sub_scores;
        std::vector<char> sub_pos;
        for (std::size_t v = 0; v < n; ++v) {
            if (!split.test[v] && !ood_mask[v]) continue;
            sub_scores.push_back(epist[v]);
            sub_pos.push_back(ood_mask[v]);
        }
        record.metrics["auc_roc_epist"] = gpn::auc_roc(sub_scores, sub_pos);
        record.metrics["auc_pr_epist"] = gpn::auc_pr(sub_scores, sub_pos);
    }
    emit(ensure_out_dir(opts), {record});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph posterior network training and uncertainty evaluation"};
    app.require_subcommand(1);

    Options opts;
    std::string kind = "feature-normal";
    std::string method = "gkde";
    std::string left_out_csv;
    std::string levels_csv;
    std::string seeds_csv;
    double fraction = 0.1;

    auto add_common = [&](CLI::App* cmd, bool needs_data) {
        auto* data_opt = cmd->add_option("--data", opts.data_dir, "dataset directory");
        if (needs_data) data_opt->required();
        cmd->add_option("--config", opts.config_file, "key-value config file");
        cmd->add_option("--seed", opts.seed, "random seed");
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--checkpoint", opts.checkpoint, "model checkpoint path");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
    add_common(synth, false);

    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train, true);

    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on clean data");
    add_common(eval, true);

    auto* ood = app.add_subcommand("ood", "out-of-distribution detection experiment");
    add_common(ood, true);
    ood->add_option("--kind", kind,
                    "feature-bernoulli|feature-normal|left-out-classes|edges-random|"
                    "edges-dice|misclassification");
    ood->add_option("--fraction", fraction, "perturbed fraction");
    ood->add_option("--left-out", left_out_csv, "comma-separated left-out classes");
    ood->add_option("--seeds", seeds_csv,
                    "comma-separated seed list; runs train+eval per seed in parallel workers "
                    "and appends a mean/std aggregate record");

    auto* shift = app.add_subcommand("shift", "graded perturbation sweep");
    add_common(shift, true);
    shift->add_option("--kind", kind, "feature-normal|feature-bernoulli|edges-random|edges-dice");
    shift->add_option("--levels", levels_csv, "comma-separated perturbation levels");

    auto* baseline = app.add_subcommand("baseline", "parameterless GKDE / LP baselines");
    add_common(baseline, true);
    baseline->add_option("--method", method, "gkde|lp");
    baseline->add_option("--left-out", left_out_csv, "comma-separated left-out classes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(opts);
        if (train->parsed()) return cmd_train(opts);
        if (eval->parsed()) return cmd_eval(opts);
        if (ood->parsed()) return cmd_ood(opts, kind, fraction, left_out_csv, seeds_csv);
        if (shift->parsed()) return cmd_shift(opts, kind, levels_csv);
        if (baseline->parsed()) return cmd_baseline(opts, method, left_out_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
