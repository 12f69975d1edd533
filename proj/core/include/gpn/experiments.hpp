#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gpn/dataset.hpp"
#include "gpn/model.hpp"

namespace gpn {

struct OodExperiment {
    enum class Kind {
        feature_bernoulli,
        feature_normal,
        left_out_classes,
        edges_random,
        edges_dice,
        misclassification,
    };
    Kind kind = Kind::feature_normal;
    double fraction = 0.1;      // node fraction (features) or edge fraction
    std::vector<int> left_out;  // classes, for Kind::left_out_classes
    std::uint64_t seed = 0;
};

const char* to_string(OodExperiment::Kind kind);
OodExperiment::Kind ood_kind_from_string(const std::string& name);

struct ResultRecord {
    std::string name;
    std::map<std::string, double> metrics;
    std::map<std::string, std::string> config;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
};

// Evaluates a trained model under one OOD protocol. Feature kinds perturb a
// fraction of the test nodes; detection metrics use the four uncertainty
// scores with positives = OOD nodes (or misclassified test nodes). For
// left-out classes the model must have been trained on the matching view.
ResultRecord run_ood_experiment(const GpnModel& model, const Dataset& data, const SplitSpec& split,
                                const OodExperiment& exp);

// Evaluates a trained model on increasingly perturbed copies of the data;
// nothing is retrained. Per level: test accuracy, ECE, mean aleatoric and
// epistemic confidence plus their ratios to the clean run.
std::vector<ResultRecord> run_shift_sweep(const GpnModel& model, const Dataset& data,
                                          const SplitSpec& split, OodExperiment::Kind kind,
                                          std::span<const double> levels, std::uint64_t seed);

// Clean metrics of a trained model: accuracy, Brier, ECE, confidence means.
ResultRecord evaluate_clean(const GpnModel& model, const Dataset& data, const SplitSpec& split);

// Mean and sample standard deviation per metric over runs; metrics missing
// from any run are dropped.
ResultRecord aggregate_records(std::span<const ResultRecord> records, const std::string& name);

// Runs one (config, seed) job per worker thread; each job owns its model and
// RNG, shared inputs are read-only, results are merged by the caller's
// thread. Returns one record per seed in seed order.
std::vector<ResultRecord> run_seeds_parallel(
    const std::function<ResultRecord(std::uint64_t)>& run_one,
    std::span<const std::uint64_t> seeds);

void write_results_json(const std::filesystem::path& path, std::span<const ResultRecord> records);
void write_results_csv(const std::filesystem::path& path, std::span<const ResultRecord> records);
void write_history_csv(const std::filesystem::path& path, const FitHistory& history);

inline constexpr std::array<double, 6> kDefaultShiftLevels{0.0, 0.1, 0.2, 0.5, 0.8, 0.99};

}  // namespace gpn
