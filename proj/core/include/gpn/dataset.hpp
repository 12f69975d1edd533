#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gpn/graph.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

// Attributed labeled graph. Directory layout:
//   meta.json     {"name", "num_nodes", "num_features", "num_classes"}
//   features.bin  little-endian f64, row-major [n x D]
//   labels.bin    little-endian u32, one per node
//   edges.txt     "u v" per line, 0-based, '#' comments
struct Dataset {
    SparseGraph graph;
    TensorPtr features;       // [n x D]
    std::vector<int> labels;  // in [0, num_classes)
    std::size_t num_classes = 0;
    std::string name;

    std::size_t num_nodes() const { return graph.num_nodes; }
    std::size_t num_features() const { return features->cols(); }
};

Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

// Disjoint, exhaustive boolean masks; stratified per class.
struct SplitSpec {
    std::vector<char> train, val, test;
    std::uint64_t seed = 0;

    std::size_t count(const std::vector<char>& mask) const;
};

// Per-class proportional allocation, floor-rounded, at least one train node
// per class; the remainder goes to test.
SplitSpec stratified_split(const Dataset& data, std::array<double, 3> ratios, std::uint64_t seed);

inline SplitSpec stratified_split(const Dataset& data, std::uint64_t seed) {
    return stratified_split(data, {0.05, 0.15, 0.80}, seed);
}

enum class FeatureNoise { bernoulli, normal };

// Replaces the feature rows of a random node subset with i.i.d. draws,
// Ber(0.5) or N(0, 1) per dimension. Candidates restricts the eligible
// nodes (default: all). Returns the perturbed copy and the chosen nodes.
std::pair<Dataset, std::vector<std::size_t>> perturb_features(
    const Dataset& data, FeatureNoise kind, double node_fraction, std::mt19937_64& rng,
    const std::vector<char>* candidates = nullptr);

// Left-out-classes view: left-out nodes stay in the graph but are dropped
// from train/val, remaining classes are densely re-indexed.
struct LeftOutView {
    Dataset data;               // labels remapped to [0, C_id); OOD nodes get -1
    SplitSpec split;            // train/val filtered; test keeps only ID nodes
    std::vector<char> ood_mask; // all left-out-class nodes
    std::vector<int> id_classes;  // original index per new index
};

LeftOutView left_out_class_setup(const Dataset& data, const SplitSpec& split,
                                 const std::vector<int>& left_out);

// Gaussian class-conditional features (class c mean = unit vector e_c,
// sigma = 0.25, so means are 4 sigma apart along each axis) and edges
// sampled with P(intra-class) = homophily.
Dataset make_synthetic_benchmark(std::size_t n_per_class, std::size_t num_classes,
                                 std::size_t feature_dim, double homophily, std::uint64_t seed);

}  // namespace gpn
