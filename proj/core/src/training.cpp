#include "gpn/training.hpp"

#include <cmath>

#include "gpn/special.hpp"

namespace gpn {

double expected_log_likelihood(std::span<const double> alpha, std::size_t y) {
    if (y >= alpha.size()) throw InputError("expected_log_likelihood: label out of range");
    double alpha0 = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0)) throw DomainError("expected_log_likelihood: alpha must be positive");
        alpha0 += a;
    }
    return digamma(alpha[y]) - digamma(alpha0);
}

double dirichlet_entropy(std::span<const double> alpha) {
    const double C = static_cast<double>(alpha.size());
    double alpha0 = 0.0;
    for (double a : alpha) {
        if (!(a > 0.0)) throw DomainError("dirichlet_entropy: alpha must be positive");
        alpha0 += a;
    }
    double log_b = -lgamma(alpha0);
    double weighted = 0.0;
    for (double a : alpha) {
        log_b += lgamma(a);
        weighted += (a - 1.0) * digamma(a);
    }
    return log_b + (alpha0 - C) * digamma(alpha0) - weighted;
}

TensorPtr bayesian_loss(Tape& tape, const DirichletPosterior& post, const std::vector<int>& labels,
                        const std::vector<char>& mask, const LossConfig& cfg) {
    const std::size_t n = post.alpha->rows(), C = post.alpha->cols();
    if (labels.size() != n || mask.size() != n) {
        throw ShapeError("bayesian_loss: labels and mask must cover every node");
    }
    std::vector<std::size_t> rows;
    std::vector<std::size_t> targets;
    for (std::size_t v = 0; v < n; ++v) {
        if (!mask[v]) continue;
        if (labels[v] < 0 || static_cast<std::size_t>(labels[v]) >= C) {
            throw InputError("bayesian_loss: masked node has no valid label");
        }
        rows.push_back(v);
        targets.push_back(static_cast<std::size_t>(labels[v]));
    }
    if (rows.empty()) throw ParameterError("bayesian_loss: empty mask");

    auto A = row_gather(tape, post.alpha, rows);             // [m x C]
    auto a0 = row_sum(tape, A);                              // [m]
    auto ay = take_per_row(tape, A, targets);                // [m]
    auto ell = sub(tape, digamma(tape, ay), digamma(tape, a0));

    // H[Dir] = sum_c lgamma(a_c) - lgamma(a0) + (a0 - C) psi(a0)
    //          - sum_c (a_c - 1) psi(a_c)
    auto log_b = sub(tape, row_sum(tape, lgamma(tape, A)), lgamma(tape, a0));
    auto conc = mul(tape, add_const(tape, a0, -static_cast<double>(C)), digamma(tape, a0));
    auto spread = row_sum(tape, mul(tape, add_const(tape, A, -1.0), digamma(tape, A)));
    auto ent = sub(tape, add(tape, log_b, conc), spread);

    auto per_node = sub(tape, neg(tape, ell), scale(tape, ent, cfg.entropy_weight));
    return scale(tape, sum(tape, per_node), 1.0 / static_cast<double>(rows.size()));
}

Adam::Adam(std::vector<ParamGroup> groups, double lr, double beta1, double beta2, double eps)
    : groups_(std::move(groups)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& g : groups_) {
        for (const auto& p : g.params) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }
}

void Adam::zero_grad() {
    for (auto& g : groups_) {
        for (auto& p : g.params) p->zero_grad();
    }
}

void Adam::step() {
    ++step_count_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
    std::size_t slot = 0;
    for (auto& group : groups_) {
        for (auto& p : group.params) {
            auto& m = m_[slot];
            auto& v = v_[slot];
            ++slot;
            for (std::size_t i = 0; i < p->size(); ++i) {
                double g = p->grad[i];
                if (!std::isfinite(g)) throw NumericError("Adam::step: non-finite gradient");
                g += group.weight_decay * p->values[i];
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p->values[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }
}

}  // namespace gpn
