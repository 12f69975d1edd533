#pragma once

#include <vector>

#include "gpn/graph.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

struct GkdeConfig {
    double sigma = 1.0;
};

struct LpConfig {
    double teleport = 0.1;
    std::size_t iterations = 10;
};

// Graph Kernel Dirichlet Estimate: alpha_v = 1 + sum over labeled nodes u of
// g(d_vu) 1{y_u = c}, g(d) = exp(-d^2 / 2 sigma^2) / (sigma sqrt(2 pi)),
// d = BFS hop distance, unreachable pairs contribute 0. [n x C]
TensorPtr gkde_alpha(const SparseGraph& graph, const std::vector<int>& labels,
                     const std::vector<std::size_t>& labeled, std::size_t num_classes,
                     const GkdeConfig& cfg);

// Label-propagation evidence: per-class label densities rho_0(u|c) =
// 1{y_u = c}/|L_c| diffused with mass-preserving PPR, alpha = 1 + rho. [n x C]
TensorPtr lp_alpha(const SparseGraph& graph, const std::vector<int>& labels,
                   const std::vector<std::size_t>& labeled, std::size_t num_classes,
                   const LpConfig& cfg);

}  // namespace gpn
