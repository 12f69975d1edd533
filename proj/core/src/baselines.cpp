#include "gpn/baselines.hpp"

#include <cmath>

namespace gpn {

TensorPtr gkde_alpha(const SparseGraph& graph, const std::vector<int>& labels,
                     const std::vector<std::size_t>& labeled, std::size_t num_classes,
                     const GkdeConfig& cfg) {
    if (!(cfg.sigma > 0.0)) throw ParameterError("gkde_alpha: sigma must be positive");
    if (labeled.empty()) throw ParameterError("gkde_alpha: need at least one labeled node");
    const std::size_t n = graph.num_nodes;
    auto alpha = Tensor::full({n, num_classes}, 1.0);
    const double norm = 1.0 / (cfg.sigma * std::sqrt(2.0 * M_PI));
    const auto distances = bfs_distances(graph, labeled);
    for (std::size_t s = 0; s < labeled.size(); ++s) {
        const int y = labels[labeled[s]];
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw InputError("gkde_alpha: labeled node has no valid label");
        }
        for (std::size_t v = 0; v < n; ++v) {
            const std::int32_t d = distances[s][v];
            if (d == kUnreachable) continue;  // g(inf) = 0
            const double dd = static_cast<double>(d);
            alpha->at(v, static_cast<std::size_t>(y)) +=
                norm * std::exp(-dd * dd / (2.0 * cfg.sigma * cfg.sigma));
        }
    }
    return alpha;
}

TensorPtr lp_alpha(const SparseGraph& graph, const std::vector<int>& labels,
                   const std::vector<std::size_t>& labeled, std::size_t num_classes,
                   const LpConfig& cfg) {
    const std::size_t n = graph.num_nodes;
    std::vector<std::size_t> class_counts(num_classes, 0);
    for (std::size_t u : labeled) {
        if (labels[u] < 0 || static_cast<std::size_t>(labels[u]) >= num_classes) {
            throw InputError("lp_alpha: labeled node has no valid label");
        }
        ++class_counts[labels[u]];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (class_counts[c] == 0) {
            throw InputError("lp_alpha: class " + std::to_string(c) + " has no labeled node");
        }
    }
    auto rho0 = Tensor::zeros({n, num_classes});
    for (std::size_t u : labeled) {
        const auto c = static_cast<std::size_t>(labels[u]);
        rho0->at(u, c) = 1.0 / static_cast<double>(class_counts[c]);
    }
    PropagationOperator op(graph, PropagationMode::row_stochastic, cfg.teleport, cfg.iterations);
    Tape tape;
    auto rho = propagate_reverse(tape, op, rho0);
    return add_const(tape, rho, 1.0);
}

}  // namespace gpn
