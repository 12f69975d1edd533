#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gpn/posterior.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

struct LossConfig {
    double entropy_weight = 1e-3;  // lambda
};

// E_{p ~ Dir(alpha)}[log Cat(y | p)] = psi(alpha_y) - psi(alpha_0).
double expected_log_likelihood(std::span<const double> alpha, std::size_t y);

// H[Dir(alpha)] = log B(alpha) + (alpha_0 - C) psi(alpha_0)
//               - sum_c (alpha_c - 1) psi(alpha_c).
double dirichlet_entropy(std::span<const double> alpha);

// Mean over masked nodes of -expected_log_likelihood - lambda * entropy,
// differentiable end-to-end through the posterior's alpha tensor.
TensorPtr bayesian_loss(Tape& tape, const DirichletPosterior& post, const std::vector<int>& labels,
                        const std::vector<char>& mask, const LossConfig& cfg);

// Parameters updated together under one weight-decay coefficient. Decay is
// applied as an additive lambda_wd * theta term on the gradient.
struct ParamGroup {
    std::vector<TensorPtr> params;
    double weight_decay = 0.0;
};

class Adam {
public:
    explicit Adam(std::vector<ParamGroup> groups, double lr = 0.01, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8);

    void zero_grad();
    void step();
    std::size_t step_count() const { return step_count_; }

private:
    std::vector<ParamGroup> groups_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t step_count_ = 0;
    std::vector<std::vector<double>> m_, v_;  // flat, aligned to group order
};

struct TrainSchedule {
    std::size_t warmup_epochs = 5;
    std::size_t max_epochs = 10000;
    std::size_t patience = 50;
    std::size_t eval_every = 1;
    std::uint64_t seed = 0;
};

struct FitHistory {
    std::vector<double> train_loss;  // joint-phase epochs
    std::vector<double> val_loss;
    std::size_t best_epoch = 0;  // 1-based index into the vectors above
    double best_val = 0.0;
};

}  // namespace gpn
