#include "gpn/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace gpn {

namespace {

std::vector<char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("missing file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
    const auto meta_path = dir / "meta.json";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw LoadError("missing file: " + meta_path.string());
    nlohmann::json meta;
    try {
        meta_in >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("meta.json: " + std::string(e.what()));
    }
    for (const char* key : {"name", "num_nodes", "num_features", "num_classes"}) {
        if (!meta.contains(key)) throw LoadError(std::string("meta.json: missing field ") + key);
    }
    Dataset data;
    data.name = meta["name"].get<std::string>();
    const std::size_t n = meta["num_nodes"].get<std::size_t>();
    const std::size_t d = meta["num_features"].get<std::size_t>();
    data.num_classes = meta["num_classes"].get<std::size_t>();

    const auto feat_bytes = read_file_bytes(dir / "features.bin");
    if (feat_bytes.size() != n * d * sizeof(double)) {
        throw LoadError("features.bin: expected " + std::to_string(n * d * sizeof(double)) +
                        " bytes, got " + std::to_string(feat_bytes.size()));
    }
    std::vector<double> feats(n * d);
    std::memcpy(feats.data(), feat_bytes.data(), feat_bytes.size());
    data.features = Tensor::from({n, d}, std::move(feats));
    if (!data.features->all_finite()) throw LoadError("features.bin: non-finite value");

    const auto label_bytes = read_file_bytes(dir / "labels.bin");
    if (label_bytes.size() != n * sizeof(std::uint32_t)) {
        throw LoadError("labels.bin: expected " + std::to_string(n * sizeof(std::uint32_t)) +
                        " bytes, got " + std::to_string(label_bytes.size()));
    }
    std::vector<std::uint32_t> raw(n);
    std::memcpy(raw.data(), label_bytes.data(), label_bytes.size());
    data.labels.resize(n);
    std::vector<char> seen(data.num_classes, 0);
    for (std::size_t v = 0; v < n; ++v) {
        if (raw[v] >= data.num_classes) {
            throw LoadError("labels.bin: label out of range at node " + std::to_string(v));
        }
        data.labels[v] = static_cast<int>(raw[v]);
        seen[raw[v]] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw LoadError("labels.bin: some class has no node");
    }

    data.graph = load_edge_list(dir / "edges.txt", n);
    return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json meta{{"name", data.name},
                        {"num_nodes", data.num_nodes()},
                        {"num_features", data.num_features()},
                        {"num_classes", data.num_classes}};
    std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';

    std::ofstream feat_out(dir / "features.bin", std::ios::binary);
    feat_out.write(reinterpret_cast<const char*>(data.features->values.data()),
                   static_cast<std::streamsize>(data.features->size() * sizeof(double)));

    std::vector<std::uint32_t> raw(data.labels.begin(), data.labels.end());
    std::ofstream label_out(dir / "labels.bin", std::ios::binary);
    label_out.write(reinterpret_cast<const char*>(raw.data()),
                    static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));

    save_edge_list(data.graph, dir / "edges.txt");
}

std::size_t SplitSpec::count(const std::vector<char>& mask) const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char{1}));
}

namespace {

// Per-class floor shares, then the remainder up to the global target goes
// to the classes with the largest fractional parts. Keeps every class
// within one node of its proportional share.
std::vector<std::size_t> proportional_counts(const std::vector<std::size_t>& class_sizes,
                                             double ratio, std::size_t minimum) {
    const std::size_t n = std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0});
    const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    std::vector<std::size_t> counts(class_sizes.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t allocated = 0;
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        const double ideal = ratio * static_cast<double>(class_sizes[c]);
        counts[c] = std::max(minimum, static_cast<std::size_t>(ideal));
        allocated += counts[c];
        remainders.emplace_back(ideal - std::floor(ideal), c);
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (const auto& [frac, c] : remainders) {
        if (allocated >= target) break;
        ++counts[c];
        ++allocated;
    }
    return counts;
}

}  // namespace

SplitSpec stratified_split(const Dataset& data, std::array<double, 3> ratios, std::uint64_t seed) {
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw ParameterError("stratified_split: ratios must sum to 1");
    }
    const std::size_t n = data.num_nodes();
    std::vector<std::vector<std::size_t>> by_class(data.num_classes);
    for (std::size_t v = 0; v < n; ++v) by_class[data.labels[v]].push_back(v);
    std::vector<std::size_t> class_sizes;
    for (const auto& members : by_class) {
        if (members.size() < 3) {
            throw SplitError("stratified_split: class smaller than 3 nodes");
        }
        class_sizes.push_back(members.size());
    }
    const auto n_train = proportional_counts(class_sizes, ratios[0], 1);
    const auto n_val = proportional_counts(class_sizes, ratios[1], 0);

    SplitSpec split;
    split.seed = seed;
    split.train.assign(n, 0);
    split.val.assign(n, 0);
    split.test.assign(n, 0);
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i < n_train[c]) {
                split.train[members[i]] = 1;
            } else if (i < n_train[c] + n_val[c]) {
                split.val[members[i]] = 1;
            } else {
                split.test[members[i]] = 1;
            }
        }
    }
    return split;
}

std::pair<Dataset, std::vector<std::size_t>> perturb_features(
    const Dataset& data, FeatureNoise kind, double node_fraction, std::mt19937_64& rng,
    const std::vector<char>* candidates) {
    if (node_fraction < 0.0 || node_fraction > 1.0) {
        throw ParameterError("perturb_features: fraction must lie in [0, 1]");
    }
    std::vector<std::size_t> pool;
    for (std::size_t v = 0; v < data.num_nodes(); ++v) {
        if (!candidates || (*candidates)[v]) pool.push_back(v);
    }
    const auto count = static_cast<std::size_t>(node_fraction * static_cast<double>(pool.size()));
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());

    Dataset out = data;
    out.features = Tensor::from(data.features->shape, data.features->values);
    const std::size_t d = data.num_features();
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t v : pool) {
        double* row = out.features->values.data() + v * d;
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = kind == FeatureNoise::bernoulli ? (coin(rng) ? 1.0 : 0.0) : gauss(rng);
        }
    }
    return {std::move(out), std::move(pool)};
}

LeftOutView left_out_class_setup(const Dataset& data, const SplitSpec& split,
                                 const std::vector<int>& left_out) {
    std::vector<char> is_out(data.num_classes, 0);
    for (int c : left_out) {
        if (c < 0 || static_cast<std::size_t>(c) >= data.num_classes) {
            throw InputError("left_out_class_setup: class out of range");
        }
        is_out[c] = 1;
    }
    LeftOutView view;
    std::vector<int> remap(data.num_classes, -1);
    for (std::size_t c = 0; c < data.num_classes; ++c) {
        if (!is_out[c]) {
            remap[c] = static_cast<int>(view.id_classes.size());
            view.id_classes.push_back(static_cast<int>(c));
        }
    }
    if (view.id_classes.empty()) {
        throw InputError("left_out_class_setup: all classes left out");
    }
    const std::size_t n = data.num_nodes();
    view.data = data;
    view.data.num_classes = view.id_classes.size();
    view.data.labels.resize(n);
    view.split = split;
    view.ood_mask.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        view.data.labels[v] = remap[data.labels[v]];
        if (view.data.labels[v] < 0) {
            view.ood_mask[v] = 1;
            view.split.train[v] = 0;
            view.split.val[v] = 0;
            view.split.test[v] = 0;
        }
    }
    return view;
}

Dataset make_synthetic_benchmark(std::size_t n_per_class, std::size_t num_classes,
                                 std::size_t feature_dim, double homophily, std::uint64_t seed) {
    if (n_per_class < 1 || num_classes < 1 || feature_dim < num_classes) {
        throw ParameterError(
            "make_synthetic_benchmark: need n_per_class >= 1 and feature_dim >= num_classes");
    }
    if (homophily < 0.0 || homophily > 1.0) {
        throw ParameterError("make_synthetic_benchmark: homophily must lie in [0, 1]");
    }
    const std::size_t n = n_per_class * num_classes;
    std::mt19937_64 rng(seed);

    Dataset data;
    data.name = "synthetic";
    data.num_classes = num_classes;
    data.labels.resize(n);
    for (std::size_t v = 0; v < n; ++v) data.labels[v] = static_cast<int>(v / n_per_class);

    // Class c mean is the unit vector e_c; noise sigma = 0.25.
    std::normal_distribution<double> noise(0.0, 0.25);
    std::vector<double> feats(n * feature_dim);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t j = 0; j < feature_dim; ++j) {
            feats[v * feature_dim + j] = noise(rng);
        }
        feats[v * feature_dim + static_cast<std::size_t>(data.labels[v])] += 1.0;
    }
    data.features = Tensor::from({n, feature_dim}, std::move(feats));

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::bernoulli_distribution intra(homophily);
    std::uniform_int_distribution<std::size_t> in_class(0, n_per_class - 1);
    std::uniform_int_distribution<std::size_t> any_node(0, n - 1);
    constexpr std::size_t kEdgesPerNode = 4;
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t cls = v / n_per_class;
        for (std::size_t t = 0; t < kEdgesPerNode; ++t) {
            std::size_t u;
            if (num_classes == 1 || intra(rng)) {
                do {
                    u = cls * n_per_class + in_class(rng);
                } while (u == v);
            } else {
                do {
                    u = any_node(rng);
                } while (u / n_per_class == cls);
            }
            edges.emplace_back(v, u);
        }
    }
    data.graph = from_edge_list(n, edges);
    return data;
}

}  // namespace gpn
