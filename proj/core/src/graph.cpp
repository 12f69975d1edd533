#include "gpn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace gpn {

bool SparseGraph::has_edge(std::size_t u, std::size_t v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<std::pair<std::size_t, std::size_t>> SparseGraph::edge_list() const {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(num_edges());
    for (std::size_t u = 0; u < num_nodes; ++u) {
        for (std::size_t v : neighbors(u)) {
            if (u < v) edges.emplace_back(u, v);
        }
    }
    return edges;
}

SparseGraph from_edge_list(std::size_t num_nodes,
                           const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> adjacency(num_nodes);
    for (auto [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes) {
            throw InputError("from_edge_list: node index out of range");
        }
        if (u == v) continue;
        adjacency[u].push_back(v);
        adjacency[v].push_back(u);
    }
    SparseGraph g;
    g.num_nodes = num_nodes;
    g.row_offsets.assign(num_nodes + 1, 0);
    for (std::size_t u = 0; u < num_nodes; ++u) {
        auto& nb = adjacency[u];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        g.row_offsets[u + 1] = g.row_offsets[u] + nb.size();
    }
    g.col_indices.reserve(g.row_offsets[num_nodes]);
    for (auto& nb : adjacency) {
        g.col_indices.insert(g.col_indices.end(), nb.begin(), nb.end());
    }
    return g;
}

SparseGraph load_edge_list(const std::filesystem::path& path, std::size_t num_nodes) {
    std::ifstream in(path);
    if (!in) throw LoadError("load_edge_list: cannot open " + path.string());
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::size_t u, v;
        if (!(ls >> u)) continue;  // blank or comment-only line
        if (!(ls >> v)) {
            throw LoadError("load_edge_list: malformed line " + std::to_string(lineno));
        }
        edges.emplace_back(u, v);
    }
    return from_edge_list(num_nodes, edges);
}

void save_edge_list(const SparseGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("save_edge_list: cannot open " + path.string());
    for (auto [u, v] : graph.edge_list()) {
        out << u << ' ' << v << '\n';
    }
}

PropagationOperator::PropagationOperator(const SparseGraph& graph, PropagationMode mode,
                                         double teleport, std::size_t iterations)
    : num_nodes_(graph.num_nodes),
      mode_(mode),
      teleport_(teleport),
      iterations_(iterations),
      row_offsets_(graph.row_offsets),
      col_indices_(graph.col_indices) {
    if (!(teleport > 0.0 && teleport < 1.0)) {
        throw ParameterError("PropagationOperator: teleport must lie in (0, 1)");
    }
    edge_values_.resize(col_indices_.size());
    diag_values_.resize(num_nodes_);
    for (std::size_t u = 0; u < num_nodes_; ++u) {
        const double du = static_cast<double>(graph.degree(u)) + 1.0;
        if (mode == PropagationMode::row_stochastic) {
            diag_values_[u] = 1.0 / du;
            for (std::size_t e = row_offsets_[u]; e < row_offsets_[u + 1]; ++e) {
                edge_values_[e] = 1.0 / du;
            }
        } else {
            diag_values_[u] = 1.0 / du;
            for (std::size_t e = row_offsets_[u]; e < row_offsets_[u + 1]; ++e) {
                const double dv = static_cast<double>(graph.degree(col_indices_[e])) + 1.0;
                edge_values_[e] = 1.0 / std::sqrt(du * dv);
            }
        }
    }
}

void PropagationOperator::apply(const double* x, double* y, std::size_t dim) const {
    for (std::size_t u = 0; u < num_nodes_; ++u) {
        double* yrow = y + u * dim;
        const double* xself = x + u * dim;
        for (std::size_t j = 0; j < dim; ++j) yrow[j] = diag_values_[u] * xself[j];
        for (std::size_t e = row_offsets_[u]; e < row_offsets_[u + 1]; ++e) {
            const double w = edge_values_[e];
            const double* xrow = x + col_indices_[e] * dim;
            for (std::size_t j = 0; j < dim; ++j) yrow[j] += w * xrow[j];
        }
    }
}

void PropagationOperator::apply_transpose(const double* x, double* y, std::size_t dim) const {
    std::fill(y, y + num_nodes_ * dim, 0.0);
    for (std::size_t u = 0; u < num_nodes_; ++u) {
        const double* xrow = x + u * dim;
        double* yself = y + u * dim;
        for (std::size_t j = 0; j < dim; ++j) yself[j] += diag_values_[u] * xrow[j];
        for (std::size_t e = row_offsets_[u]; e < row_offsets_[u + 1]; ++e) {
            const double w = edge_values_[e];
            double* yrow = y + col_indices_[e] * dim;
            for (std::size_t j = 0; j < dim; ++j) yrow[j] += w * xrow[j];
        }
    }
}

std::vector<double> PropagationOperator::dense() const {
    std::vector<double> m(num_nodes_ * num_nodes_, 0.0);
    for (std::size_t u = 0; u < num_nodes_; ++u) {
        m[u * num_nodes_ + u] = diag_values_[u];
        for (std::size_t e = row_offsets_[u]; e < row_offsets_[u + 1]; ++e) {
            m[u * num_nodes_ + col_indices_[e]] = edge_values_[e];
        }
    }
    return m;
}

namespace {

// One PPR step y = (1-tau) B z + tau x where B is A_hat or its transpose.
TensorPtr ppr_step(Tape& tape, const PropagationOperator& op, const TensorPtr& z,
                   const TensorPtr& x, bool transpose) {
    const std::size_t n = op.num_nodes();
    const std::size_t dim = z->cols();
    const double tau = op.teleport();
    auto out = Tensor::zeros(z->shape, z->requires_grad || x->requires_grad);
    std::vector<double> scratch(n * dim);
    if (transpose) {
        op.apply_transpose(z->values.data(), scratch.data(), dim);
    } else {
        op.apply(z->values.data(), scratch.data(), dim);
    }
    for (std::size_t i = 0; i < out->size(); ++i) {
        out->values[i] = (1.0 - tau) * scratch[i] + tau * x->values[i];
    }
    if (out->requires_grad) {
        tape.record(out, [&op, z, x, out, n, dim, tau, transpose](Adjoints& adj) {
            if (z->requires_grad) adj.of(z);
            if (x->requires_grad) adj.of(x);
            const auto* g = adj.find(out.get());
            if (!g) return;
            if (z->requires_grad) {
                auto& gz = adj.of(z);
                std::vector<double> back(n * dim);
                if (transpose) {
                    op.apply(g->data(), back.data(), dim);
                } else {
                    op.apply_transpose(g->data(), back.data(), dim);
                }
                for (std::size_t i = 0; i < gz.size(); ++i) gz[i] += (1.0 - tau) * back[i];
            }
            if (x->requires_grad) {
                auto& gx = adj.of(x);
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += tau * (*g)[i];
            }
        });
    }
    return out;
}

TensorPtr run_propagation(Tape& tape, const PropagationOperator& op, const TensorPtr& X,
                          bool transpose) {
    if (X->rank() != 2 || X->rows() != op.num_nodes()) {
        throw ShapeError("propagate: feature row count must equal the node count");
    }
    TensorPtr z = X;
    for (std::size_t k = 0; k < op.iterations(); ++k) {
        z = ppr_step(tape, op, z, X, transpose);
    }
    return z;
}

}  // namespace

TensorPtr propagate(Tape& tape, const PropagationOperator& op, const TensorPtr& X) {
    return run_propagation(tape, op, X, /*transpose=*/false);
}

TensorPtr propagate_reverse(Tape& tape, const PropagationOperator& op, const TensorPtr& X) {
    return run_propagation(tape, op, X, /*transpose=*/true);
}

std::vector<std::vector<std::int32_t>> bfs_distances(const SparseGraph& graph,
                                                     const std::vector<std::size_t>& sources) {
    if (sources.empty()) {
        throw ParameterError("bfs_distances: need at least one source");
    }
    std::vector<std::vector<std::int32_t>> result;
    result.reserve(sources.size());
    for (std::size_t s : sources) {
        if (s >= graph.num_nodes) throw InputError("bfs_distances: source out of range");
        std::vector<std::int32_t> dist(graph.num_nodes, kUnreachable);
        std::deque<std::size_t> queue{s};
        dist[s] = 0;
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t v : graph.neighbors(u)) {
                if (dist[v] == kUnreachable) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        result.push_back(std::move(dist));
    }
    return result;
}

namespace {

std::uint64_t pair_key(std::size_t u, std::size_t v, std::size_t n) {
    if (u > v) std::swap(u, v);
    return static_cast<std::uint64_t>(u) * n + v;
}

// Uniform non-existing, non-self-loop edge not already in `occupied`.
std::pair<std::size_t, std::size_t> sample_free_pair(
    std::size_t n, const std::unordered_set<std::uint64_t>& occupied, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::size_t u = pick(rng), v = pick(rng);
        if (u == v) continue;
        if (occupied.count(pair_key(u, v, n))) continue;
        return u < v ? std::make_pair(u, v) : std::make_pair(v, u);
    }
    // Dense graph: fall back to enumerating the free slots.
    std::vector<std::pair<std::size_t, std::size_t>> free_pairs;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (!occupied.count(pair_key(u, v, n))) free_pairs.emplace_back(u, v);
        }
    }
    if (free_pairs.empty()) {
        throw PerturbationError("perturb_edges: no free slot for a replacement edge");
    }
    std::uniform_int_distribution<std::size_t> idx(0, free_pairs.size() - 1);
    return free_pairs[idx(rng)];
}

}  // namespace

SparseGraph perturb_edges_random(const SparseGraph& graph, double fraction, std::mt19937_64& rng) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw ParameterError("perturb_edges_random: fraction must lie in [0, 1]");
    }
    auto edges = graph.edge_list();
    const std::size_t budget = static_cast<std::size_t>(fraction * static_cast<double>(edges.size()));
    if (budget == 0) return graph;

    std::shuffle(edges.begin(), edges.end(), rng);
    edges.resize(edges.size() - budget);  // drop `budget` random edges

    std::unordered_set<std::uint64_t> occupied;
    occupied.reserve(edges.size() * 2);
    for (auto [u, v] : edges) occupied.insert(pair_key(u, v, graph.num_nodes));
    for (std::size_t i = 0; i < budget; ++i) {
        auto e = sample_free_pair(graph.num_nodes, occupied, rng);
        occupied.insert(pair_key(e.first, e.second, graph.num_nodes));
        edges.push_back(e);
    }
    return from_edge_list(graph.num_nodes, edges);
}

SparseGraph perturb_edges_dice(const SparseGraph& graph, double fraction,
                               const std::vector<int>& labels, std::mt19937_64& rng) {
    if (fraction < 0.0 || fraction > 1.0) {
        throw ParameterError("perturb_edges_dice: fraction must lie in [0, 1]");
    }
    if (labels.size() != graph.num_nodes) {
        throw InputError("perturb_edges_dice: need one label per node");
    }
    auto edges = graph.edge_list();
    const std::size_t budget = static_cast<std::size_t>(fraction * static_cast<double>(edges.size()));
    const std::size_t ops = budget / 2;  // 50/50 delete/insert keeps |E| fixed
    if (ops == 0) return graph;

    // Deletions favour intra-class edges.
    std::vector<std::size_t> intra, inter;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        (labels[edges[i].first] == labels[edges[i].second] ? intra : inter).push_back(i);
    }
    std::shuffle(intra.begin(), intra.end(), rng);
    std::shuffle(inter.begin(), inter.end(), rng);
    std::vector<std::size_t> doomed;
    for (std::size_t i = 0; i < intra.size() && doomed.size() < ops; ++i) doomed.push_back(intra[i]);
    for (std::size_t i = 0; i < inter.size() && doomed.size() < ops; ++i) doomed.push_back(inter[i]);
    std::sort(doomed.begin(), doomed.end(), std::greater<>());
    for (std::size_t idx : doomed) {
        edges[idx] = edges.back();
        edges.pop_back();
    }

    std::unordered_set<std::uint64_t> occupied;
    occupied.reserve(edges.size() * 2);
    for (auto [u, v] : edges) occupied.insert(pair_key(u, v, graph.num_nodes));

    // Insertions favour inter-class pairs.
    std::uniform_int_distribution<std::size_t> pick(0, graph.num_nodes - 1);
    for (std::size_t k = 0; k < ops; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
            std::size_t u = pick(rng), v = pick(rng);
            if (u == v || labels[u] == labels[v]) continue;
            if (occupied.count(pair_key(u, v, graph.num_nodes))) continue;
            occupied.insert(pair_key(u, v, graph.num_nodes));
            edges.emplace_back(std::min(u, v), std::max(u, v));
            placed = true;
        }
        if (!placed) {
            auto e = sample_free_pair(graph.num_nodes, occupied, rng);
            occupied.insert(pair_key(e.first, e.second, graph.num_nodes));
            edges.push_back(e);
        }
    }
    return from_edge_list(graph.num_nodes, edges);
}

}  // namespace gpn
