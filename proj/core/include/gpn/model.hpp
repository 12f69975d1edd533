#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gpn/dataset.hpp"
#include "gpn/encoder.hpp"
#include "gpn/flows.hpp"
#include "gpn/graph.hpp"
#include "gpn/posterior.hpp"
#include "gpn/training.hpp"

namespace gpn {

struct GpnConfig {
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::size_t hidden_dim = 64;
    std::size_t latent_dim = 16;
    std::size_t num_layers = 2;
    std::size_t n_radial = 10;
    double dropout_p = 0.5;
    double teleport = 0.1;
    std::size_t iterations = 10;
    PropagationMode mode = PropagationMode::symmetric;
    BudgetMode budget = BudgetMode::per_latent;
    double prior_value = 1.0;
    bool encoder_bias = true;
    std::uint64_t init_seed = 0;
};

// Encoder -> per-class flow densities -> budget-scaled evidence -> PPR
// diffusion -> Dirichlet posterior.
class GpnModel {
public:
    static GpnModel init(const GpnConfig& config);

    struct Forward {
        TensorPtr latent;    // [n x L]
        TensorPtr log_dens;  // [n x C]
        EvidenceSet evidence;
        DirichletPosterior post;
    };

    Forward forward(Tape& tape, const PropagationOperator& op, const TensorPtr& X, bool training,
                    std::mt19937_64& rng) const;

    // Feature-only half of the pipeline (no diffusion).
    TensorPtr feature_log_densities(Tape& tape, const TensorPtr& X) const;

    PropagationOperator make_operator(const SparseGraph& graph) const;

    std::vector<TensorPtr> parameters() const;

    void save_checkpoint(const std::filesystem::path& path) const;
    static GpnModel load_checkpoint(const std::filesystem::path& path);

    GpnConfig config;
    MlpEncoder encoder;
    ClassConditionalDensity density;
    CertaintyBudget budget;
};

// Value-level evaluation of a trained model on a graph.
struct Evaluation {
    std::vector<int> preds;
    TensorPtr alpha;            // posterior parameters [n x C]
    std::vector<double> p_net;  // posterior mean, row-major [n x C]
    std::vector<double> p_ft;   // feature-only categorical mean
    std::vector<double> alpha0_ft;
    std::vector<double> alpha0_agg;
    UncertaintyScores scores;
};

Evaluation evaluate(const GpnModel& model, const SparseGraph& graph, const TensorPtr& X);

struct TrainConfig {
    TrainSchedule schedule;
    LossConfig loss;
    double lr = 0.01;
    double weight_decay = 1e-3;  // encoder only; flows are never decayed
};

// Warm-up epochs of flow-only likelihood training (encoder outputs held
// constant), then joint full-batch training of the Bayesian loss with early
// stopping on the validation loss. Restores the best-validation parameters.
FitHistory fit(GpnModel& model, const Dataset& data, const SplitSpec& split,
               const TrainConfig& cfg);

}  // namespace gpn
