#pragma once

#include <span>
#include <vector>

#include "gpn/graph.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

enum class BudgetMode {
    per_latent,                // N = sqrt(4 pi)^L
    per_latent_times_classes,  // N = sqrt(4 pi)^L * C
};

// Total evidence scale distributed over latent space by the flow densities.
// Kept in the log domain: sqrt(4 pi)^16 is ~6e8 and multiplies densities
// that can underflow, so products are formed as exponent sums.
struct CertaintyBudget {
    std::size_t latent_dim = 16;
    BudgetMode mode = BudgetMode::per_latent;

    double log_budget(std::size_t num_classes) const;
};

// Per-node, per-class pseudo-counts before and after diffusion.
struct EvidenceSet {
    TensorPtr beta_ft;     // [n x C]
    TensorPtr beta_agg;    // [n x C]
    TensorPtr alpha0_ft;   // [n]
    TensorPtr alpha0_agg;  // [n]
};

// Dirichlet parameters alpha = prior + beta_agg, elementwise.
struct DirichletPosterior {
    TensorPtr alpha;  // [n x C]
    double prior_value = 1.0;
};

// beta_ft = exp(log N + log p(z|c) + log p(c)) with p(c) = 1/C.
TensorPtr feature_evidence(Tape& tape, const TensorPtr& log_dens, const CertaintyBudget& budget);

// PPR diffusion of the feature pseudo-counts.
TensorPtr aggregate_evidence(Tape& tape, const TensorPtr& beta_ft, const PropagationOperator& op);

EvidenceSet make_evidence(Tape& tape, const TensorPtr& beta_ft, const PropagationOperator& op);

DirichletPosterior make_posterior(Tape& tape, const TensorPtr& beta_agg, double prior_value);

// Argmax of alpha per node, ties broken by the lowest class index.
std::vector<int> predict(const DirichletPosterior& post);

// Four uncertainty rankings plus entropy-based aleatoric variants. More
// negative = more certain for the -max and -alpha0 scores.
struct UncertaintyScores {
    std::vector<double> alea_net;          // -max_c p_agg
    std::vector<double> alea_ft;           // -max_c p_ft
    std::vector<double> epist_net;         // -alpha0_agg
    std::vector<double> epist_ft;          // -alpha0_ft
    std::vector<double> alea_entropy_net;  // H[Cat(p_agg)]
    std::vector<double> alea_entropy_ft;   // H[Cat(p_ft)]
};

UncertaintyScores uncertainty_scores(const DirichletPosterior& post, const EvidenceSet& evidence);

// -sum p log p with 0 log 0 = 0; p must lie on the simplex.
double entropy_cat(std::span<const double> p);

// Row-normalized categorical means. An all-zero row maps to the uniform
// vector (the prior-dominated limit).
std::vector<double> normalized_rows(const TensorPtr& m);

}  // namespace gpn
