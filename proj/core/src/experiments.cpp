#include "gpn/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "gpn/metrics.hpp"
#include "json.hpp"

namespace gpn {

const char* to_string(OodExperiment::Kind kind) {
    switch (kind) {
        case OodExperiment::Kind::feature_bernoulli: return "feature-bernoulli";
        case OodExperiment::Kind::feature_normal: return "feature-normal";
        case OodExperiment::Kind::left_out_classes: return "left-out-classes";
        case OodExperiment::Kind::edges_random: return "edges-random";
        case OodExperiment::Kind::edges_dice: return "edges-dice";
        case OodExperiment::Kind::misclassification: return "misclassification";
    }
    return "unknown";
}

OodExperiment::Kind ood_kind_from_string(const std::string& name) {
    if (name == "feature-bernoulli") return OodExperiment::Kind::feature_bernoulli;
    if (name == "feature-normal") return OodExperiment::Kind::feature_normal;
    if (name == "left-out-classes") return OodExperiment::Kind::left_out_classes;
    if (name == "edges-random") return OodExperiment::Kind::edges_random;
    if (name == "edges-dice") return OodExperiment::Kind::edges_dice;
    if (name == "misclassification") return OodExperiment::Kind::misclassification;
    throw ParameterError("unknown experiment kind: " + name);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TensorPtr probs_tensor(const std::vector<double>& p, std::size_t n, std::size_t C) {
    return Tensor::from({n, C}, p);
}

// AUC-ROC / AUC-PR for each of the four uncertainty scores over `eligible`
// nodes, positives flagged per node. No-op when a class is missing (e.g. a
// perfect classifier in misclassification mode).
void add_detection_metrics(ResultRecord& record, const UncertaintyScores& scores,
                           const std::vector<char>& eligible, const std::vector<char>& positives) {
    std::size_t pos = 0, neg = 0;
    for (std::size_t v = 0; v < eligible.size(); ++v) {
        if (!eligible[v]) continue;
        (positives[v] ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0) return;
    std::vector<double> sub_scores;
    std::vector<char> sub_pos;
    const std::pair<const char*, const std::vector<double>*> score_list[] = {
        {"alea_net", &scores.alea_net},
        {"alea_ft", &scores.alea_ft},
        {"epist_net", &scores.epist_net},
        {"epist_ft", &scores.epist_ft},
    };
    for (const auto& [name, values] : score_list) {
        sub_scores.clear();
        sub_pos.clear();
        for (std::size_t v = 0; v < eligible.size(); ++v) {
            if (!eligible[v]) continue;
            sub_scores.push_back((*values)[v]);
            sub_pos.push_back(positives[v]);
        }
        record.metrics["auc_roc_" + std::string(name)] = auc_roc(sub_scores, sub_pos);
        record.metrics["auc_pr_" + std::string(name)] = auc_pr(sub_scores, sub_pos);
    }
}

double mean_over(const std::vector<double>& values, const std::vector<char>& mask) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t v = 0; v < values.size(); ++v) {
        if (!mask[v]) continue;
        acc += values[v];
        ++count;
    }
    return count ? acc / static_cast<double>(count) : 0.0;
}

}  // namespace

ResultRecord evaluate_clean(const GpnModel& model, const Dataset& data, const SplitSpec& split) {
    const auto start = Clock::now();
    ResultRecord record;
    record.name = "clean";
    record.seed = split.seed;
    auto ev = evaluate(model, data.graph, data.features);
    auto probs = probs_tensor(ev.p_net, data.num_nodes(), data.num_classes);
    record.metrics["test_acc"] = accuracy(ev.preds, data.labels, split.test);
    record.metrics["train_acc"] = accuracy(ev.preds, data.labels, split.train);
    record.metrics["brier"] = brier(probs, data.labels, split.test);
    record.metrics["ece"] = ece(probs, ev.preds, data.labels, split.test);
    record.metrics["mean_alpha0_agg"] = mean_over(ev.alpha0_agg, split.test);
    record.metrics["mean_alpha0_ft"] = mean_over(ev.alpha0_ft, split.test);
    record.config["dataset"] = data.name;
    record.runtime_seconds = seconds_since(start);
    return record;
}

ResultRecord run_ood_experiment(const GpnModel& model, const Dataset& data, const SplitSpec& split,
                                const OodExperiment& exp) {
    const auto start = Clock::now();
    ResultRecord record;
    record.name = std::string("ood-") + to_string(exp.kind);
    record.seed = exp.seed;
    record.config["kind"] = to_string(exp.kind);
    record.config["fraction"] = std::to_string(exp.fraction);
    record.config["dataset"] = data.name;
    std::mt19937_64 rng(exp.seed);

    switch (exp.kind) {
        case OodExperiment::Kind::feature_bernoulli:
        case OodExperiment::Kind::feature_normal: {
            const auto noise = exp.kind == OodExperiment::Kind::feature_bernoulli
                                   ? FeatureNoise::bernoulli
                                   : FeatureNoise::normal;
            auto [perturbed, nodes] = perturb_features(data, noise, exp.fraction, rng, &split.test);
            auto ev = evaluate(model, perturbed.graph, perturbed.features);
            std::vector<char> ood(data.num_nodes(), 0);
            for (std::size_t v : nodes) ood[v] = 1;
            std::vector<char> id_test(data.num_nodes(), 0);
            for (std::size_t v = 0; v < data.num_nodes(); ++v) {
                id_test[v] = split.test[v] && !ood[v];
            }
            record.metrics["id_acc"] = accuracy(ev.preds, data.labels, id_test);
            if (!nodes.empty()) {
                record.metrics["ood_acc"] = accuracy(ev.preds, data.labels, ood);
                add_detection_metrics(record, ev.scores, split.test, ood);
            }
            break;
        }
        case OodExperiment::Kind::left_out_classes: {
            auto view = left_out_class_setup(data, split, exp.left_out);
            auto ev = evaluate(model, view.data.graph, view.data.features);
            record.metrics["id_acc"] = accuracy(ev.preds, view.data.labels, view.split.test);
            std::vector<char> eligible(data.num_nodes(), 0);
            for (std::size_t v = 0; v < data.num_nodes(); ++v) {
                eligible[v] = view.split.test[v] || view.ood_mask[v];
            }
            add_detection_metrics(record, ev.scores, eligible, view.ood_mask);
            break;
        }
        case OodExperiment::Kind::edges_random:
        case OodExperiment::Kind::edges_dice: {
            auto graph = exp.kind == OodExperiment::Kind::edges_random
                             ? perturb_edges_random(data.graph, exp.fraction, rng)
                             : perturb_edges_dice(data.graph, exp.fraction, data.labels, rng);
            auto ev = evaluate(model, graph, data.features);
            auto probs = probs_tensor(ev.p_net, data.num_nodes(), data.num_classes);
            record.metrics["id_acc"] = accuracy(ev.preds, data.labels, split.test);
            record.metrics["ece"] = ece(probs, ev.preds, data.labels, split.test);
            record.metrics["mean_alpha0_agg"] = mean_over(ev.alpha0_agg, split.test);
            break;
        }
        case OodExperiment::Kind::misclassification: {
            auto ev = evaluate(model, data.graph, data.features);
            record.metrics["id_acc"] = accuracy(ev.preds, data.labels, split.test);
            std::vector<char> wrong(data.num_nodes(), 0);
            for (std::size_t v = 0; v < data.num_nodes(); ++v) {
                wrong[v] = split.test[v] && ev.preds[v] != data.labels[v];
            }
            add_detection_metrics(record, ev.scores, split.test, wrong);
            break;
        }
    }
    record.runtime_seconds = seconds_since(start);
    return record;
}

std::vector<ResultRecord> run_shift_sweep(const GpnModel& model, const Dataset& data,
                                          const SplitSpec& split, OodExperiment::Kind kind,
                                          std::span<const double> levels, std::uint64_t seed) {
    std::vector<ResultRecord> records;
    double clean_alea = 0.0, clean_epist = 0.0;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const double level = levels[li];
        if (level < 0.0 || level > 1.0) {
            throw ParameterError("run_shift_sweep: levels must lie in [0, 1]");
        }
        const auto start = Clock::now();
        std::mt19937_64 rng(seed + li);
        ResultRecord record;
        record.name = std::string("shift-") + to_string(kind);
        record.seed = seed;
        record.config["kind"] = to_string(kind);
        record.config["level"] = std::to_string(level);
        record.config["dataset"] = data.name;
        record.metrics["level"] = level;

        Evaluation ev;
        switch (kind) {
            case OodExperiment::Kind::feature_bernoulli:
            case OodExperiment::Kind::feature_normal: {
                const auto noise = kind == OodExperiment::Kind::feature_bernoulli
                                       ? FeatureNoise::bernoulli
                                       : FeatureNoise::normal;
                auto [perturbed, nodes] = perturb_features(data, noise, level, rng);
                ev = evaluate(model, perturbed.graph, perturbed.features);
                break;
            }
            case OodExperiment::Kind::edges_random:
            case OodExperiment::Kind::edges_dice: {
                auto graph = kind == OodExperiment::Kind::edges_random
                                 ? perturb_edges_random(data.graph, level, rng)
                                 : perturb_edges_dice(data.graph, level, data.labels, rng);
                ev = evaluate(model, graph, data.features);
                break;
            }
            default:
                throw ParameterError("run_shift_sweep: unsupported kind");
        }
        auto probs = probs_tensor(ev.p_net, data.num_nodes(), data.num_classes);
        record.metrics["acc"] = accuracy(ev.preds, data.labels, split.test);
        record.metrics["ece"] = ece(probs, ev.preds, data.labels, split.test);
        std::vector<double> max_p(data.num_nodes());
        for (std::size_t v = 0; v < data.num_nodes(); ++v) {
            const double* row = ev.p_net.data() + v * data.num_classes;
            max_p[v] = *std::max_element(row, row + data.num_classes);
        }
        std::vector<double> alea_entropy = ev.scores.alea_entropy_net;
        const double alea_conf = mean_over(max_p, split.test);
        const double epist_conf = mean_over(ev.alpha0_agg, split.test);
        record.metrics["mean_alea_conf"] = alea_conf;
        record.metrics["mean_epist_conf"] = epist_conf;
        record.metrics["mean_alea_entropy"] = mean_over(alea_entropy, split.test);
        if (li == 0) {
            clean_alea = alea_conf;
            clean_epist = epist_conf;
        }
        record.metrics["rel_alea_conf"] = clean_alea != 0.0 ? alea_conf / clean_alea : 0.0;
        record.metrics["rel_epist_conf"] = clean_epist != 0.0 ? epist_conf / clean_epist : 0.0;
        record.runtime_seconds = seconds_since(start);
        records.push_back(std::move(record));
    }
    return records;
}

ResultRecord aggregate_records(std::span<const ResultRecord> records, const std::string& name) {
    if (records.empty()) throw ParameterError("aggregate_records: no records");
    ResultRecord agg;
    agg.name = name;
    agg.seed = records.front().seed;
    agg.config["runs"] = std::to_string(records.size());
    for (const auto& [metric, first_value] : records.front().metrics) {
        double sum = 0.0, sq = 0.0;
        std::size_t count = 0;
        for (const auto& record : records) {
            auto it = record.metrics.find(metric);
            if (it == record.metrics.end()) break;
            sum += it->second;
            sq += it->second * it->second;
            ++count;
        }
        if (count != records.size()) continue;
        const double n = static_cast<double>(count);
        const double mean = sum / n;
        agg.metrics[metric + "_mean"] = mean;
        agg.metrics[metric + "_std"] =
            count > 1 ? std::sqrt(std::max(0.0, (sq - n * mean * mean) / (n - 1.0))) : 0.0;
        agg.runtime_seconds += 0.0;
    }
    for (const auto& record : records) agg.runtime_seconds += record.runtime_seconds;
    return agg;
}

std::vector<ResultRecord> run_seeds_parallel(
    const std::function<ResultRecord(std::uint64_t)>& run_one,
    std::span<const std::uint64_t> seeds) {
    std::vector<ResultRecord> records(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::vector<std::thread> workers;
    workers.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        workers.emplace_back([&, i] {
            try {
                records[i] = run_one(seeds[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& worker : workers) worker.join();
    for (auto& error : errors) {
        if (error) std::rethrow_exception(error);
    }
    return records;
}

void write_results_json(const std::filesystem::path& path, std::span<const ResultRecord> records) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& record : records) {
        nlohmann::json j{{"name", record.name},
                         {"seed", record.seed},
                         {"runtime_seconds", record.runtime_seconds},
                         {"metrics", record.metrics},
                         {"config", record.config}};
        out.push_back(std::move(j));
    }
    std::ofstream file(path);
    if (!file) throw LoadError("write_results_json: cannot open " + path.string());
    file << out.dump(2) << '\n';
}

void write_results_csv(const std::filesystem::path& path, std::span<const ResultRecord> records) {
    std::ofstream file(path);
    if (!file) throw LoadError("write_results_csv: cannot open " + path.string());
    file << "name,seed,runtime_seconds,metric,value\n";
    for (const auto& record : records) {
        for (const auto& [metric, value] : record.metrics) {
            file << record.name << ',' << record.seed << ',' << record.runtime_seconds << ','
                 << metric << ',' << value << '\n';
        }
    }
}

void write_history_csv(const std::filesystem::path& path, const FitHistory& history) {
    std::ofstream file(path);
    if (!file) throw LoadError("write_history_csv: cannot open " + path.string());
    file << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
        file << (e + 1) << ',' << history.train_loss[e] << ',' << history.val_loss[e] << '\n';
    }
}

}  // namespace gpn
