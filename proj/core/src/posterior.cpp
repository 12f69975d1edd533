#include "gpn/posterior.hpp"

#include <algorithm>
#include <cmath>

namespace gpn {

namespace {

constexpr double kLog4Pi = 2.5310242469692907930;  // log(4 pi)

}  // namespace

double CertaintyBudget::log_budget(std::size_t num_classes) const {
    double lb = 0.5 * static_cast<double>(latent_dim) * kLog4Pi;
    if (mode == BudgetMode::per_latent_times_classes) {
        lb += std::log(static_cast<double>(num_classes));
    }
    return lb;
}

TensorPtr feature_evidence(Tape& tape, const TensorPtr& log_dens, const CertaintyBudget& budget) {
    if (log_dens->rank() != 2) {
        throw ShapeError("feature_evidence: expected [n x C] log densities");
    }
    if (!log_dens->all_finite()) {
        throw NumericError("feature_evidence: non-finite log density");
    }
    const std::size_t C = log_dens->cols();
    const double shift = budget.log_budget(C) - std::log(static_cast<double>(C));
    return exp(tape, add_const(tape, log_dens, shift));
}

TensorPtr aggregate_evidence(Tape& tape, const TensorPtr& beta_ft, const PropagationOperator& op) {
    return propagate(tape, op, beta_ft);
}

EvidenceSet make_evidence(Tape& tape, const TensorPtr& beta_ft, const PropagationOperator& op) {
    EvidenceSet ev;
    ev.beta_ft = beta_ft;
    ev.beta_agg = aggregate_evidence(tape, beta_ft, op);
    ev.alpha0_ft = row_sum(tape, ev.beta_ft);
    ev.alpha0_agg = row_sum(tape, ev.beta_agg);
    return ev;
}

DirichletPosterior make_posterior(Tape& tape, const TensorPtr& beta_agg, double prior_value) {
    if (!(prior_value > 0.0)) {
        throw ParameterError("make_posterior: prior must be positive");
    }
    for (double b : beta_agg->values) {
        if (b < 0.0) throw InputError("make_posterior: negative evidence");
    }
    return DirichletPosterior{add_const(tape, beta_agg, prior_value), prior_value};
}

std::vector<int> predict(const DirichletPosterior& post) {
    const std::size_t n = post.alpha->rows(), C = post.alpha->cols();
    std::vector<int> preds(n);
    for (std::size_t v = 0; v < n; ++v) {
        const double* row = post.alpha->values.data() + v * C;
        preds[v] = static_cast<int>(std::max_element(row, row + C) - row);
    }
    return preds;
}

std::vector<double> normalized_rows(const TensorPtr& m) {
    const std::size_t n = m->rows(), C = m->cols();
    std::vector<double> p(n * C);
    for (std::size_t v = 0; v < n; ++v) {
        double total = 0.0;
        for (std::size_t c = 0; c < C; ++c) total += m->values[v * C + c];
        for (std::size_t c = 0; c < C; ++c) {
            p[v * C + c] = total > 0.0 ? m->values[v * C + c] / total
                                       : 1.0 / static_cast<double>(C);
        }
    }
    return p;
}

UncertaintyScores uncertainty_scores(const DirichletPosterior& post, const EvidenceSet& evidence) {
    const std::size_t n = evidence.beta_agg->rows(), C = evidence.beta_agg->cols();
    UncertaintyScores s;
    s.alea_net.resize(n);
    s.alea_ft.resize(n);
    s.epist_net.resize(n);
    s.epist_ft.resize(n);
    s.alea_entropy_net.resize(n);
    s.alea_entropy_ft.resize(n);
    const auto p_agg = normalized_rows(evidence.beta_agg);
    const auto p_ft = normalized_rows(evidence.beta_ft);
    // epistemic scores count total posterior pseudo-observations, so the
    // prior mass C * prior_value rides on top of the evidence
    const double prior_mass = static_cast<double>(C) * post.prior_value;
    for (std::size_t v = 0; v < n; ++v) {
        std::span<const double> rag{p_agg.data() + v * C, C};
        std::span<const double> rft{p_ft.data() + v * C, C};
        s.alea_net[v] = -*std::max_element(rag.begin(), rag.end());
        s.alea_ft[v] = -*std::max_element(rft.begin(), rft.end());
        s.epist_net[v] = -(evidence.alpha0_agg->values[v] + prior_mass);
        s.epist_ft[v] = -(evidence.alpha0_ft->values[v] + prior_mass);
        s.alea_entropy_net[v] = entropy_cat(rag);
        s.alea_entropy_ft[v] = entropy_cat(rft);
    }
    return s;
}

double entropy_cat(std::span<const double> p) {
    double total = 0.0;
    for (double pi : p) {
        if (pi < 0.0) throw InputError("entropy_cat: negative probability");
        total += pi;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw InputError("entropy_cat: probabilities must sum to 1");
    }
    double h = 0.0;
    for (double pi : p) {
        if (pi > 0.0) h -= pi * std::log(pi);
    }
    return h;
}

}  // namespace gpn
