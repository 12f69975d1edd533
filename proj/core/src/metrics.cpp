#include "gpn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gpn {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                const std::vector<char>& mask) {
    if (preds.size() != labels.size() || preds.size() != mask.size()) {
        throw ShapeError("accuracy: size mismatch");
    }
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (!mask[i]) continue;
        ++total;
        if (preds[i] == labels[i]) ++correct;
    }
    if (total == 0) throw ParameterError("accuracy: empty mask");
    return static_cast<double>(correct) / static_cast<double>(total);
}

double brier(const TensorPtr& probs, const std::vector<int>& labels,
             const std::vector<char>& mask) {
    const std::size_t n = probs->rows(), C = probs->cols();
    if (labels.size() != n || mask.size() != n) throw ShapeError("brier: size mismatch");
    double acc = 0.0;
    std::size_t total = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (!mask[v]) continue;
        const double* row = probs->values.data() + v * C;
        double row_sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            if (row[c] < 0.0) throw InputError("brier: negative probability");
            row_sum += row[c];
        }
        if (std::abs(row_sum - 1.0) > 1e-6) {
            throw InputError("brier: row does not lie on the simplex");
        }
        double sq = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const double diff = row[c] - (static_cast<int>(c) == labels[v] ? 1.0 : 0.0);
            sq += diff * diff;
        }
        acc += sq;
        ++total;
    }
    if (total == 0) throw ParameterError("brier: empty mask");
    return acc / static_cast<double>(total) / static_cast<double>(C);
}

double ece(const TensorPtr& probs, const std::vector<int>& preds, const std::vector<int>& labels,
           const std::vector<char>& mask, std::size_t bins) {
    if (bins < 1) throw ParameterError("ece: need at least one bin");
    const std::size_t n = probs->rows(), C = probs->cols();
    if (preds.size() != n || labels.size() != n || mask.size() != n) {
        throw ShapeError("ece: size mismatch");
    }
    std::vector<double> conf_sum(bins, 0.0), acc_sum(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    std::size_t total = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (!mask[v]) continue;
        const double* row = probs->values.data() + v * C;
        const double conf = *std::max_element(row, row + C);
        // bin m covers (m/M, (m+1)/M]; conf = 0 lands in the first bin
        auto bin = conf <= 0.0 ? std::size_t{0}
                               : static_cast<std::size_t>(
                                     std::ceil(conf * static_cast<double>(bins))) - 1;
        bin = std::min(bin, bins - 1);
        conf_sum[bin] += conf;
        acc_sum[bin] += preds[v] == labels[v] ? 1.0 : 0.0;
        ++count[bin];
        ++total;
    }
    if (total == 0) throw ParameterError("ece: empty mask");
    double result = 0.0;
    for (std::size_t m = 0; m < bins; ++m) {
        if (count[m] == 0) continue;
        const double weight = static_cast<double>(count[m]) / static_cast<double>(total);
        const double cnt = static_cast<double>(count[m]);
        result += weight * std::abs(acc_sum[m] / cnt - conf_sum[m] / cnt);
    }
    return result;
}

namespace {

void check_two_classes(const std::vector<char>& positives, std::size_t n, const char* fn) {
    std::size_t pos = 0;
    for (char p : positives) pos += p ? 1 : 0;
    if (pos == 0 || pos == n) {
        throw MetricError(std::string(fn) + ": need both classes present");
    }
}

}  // namespace

double auc_roc(std::span<const double> scores, const std::vector<char>& positives) {
    const std::size_t n = scores.size();
    if (positives.size() != n) throw ShapeError("auc_roc: size mismatch");
    check_two_classes(positives, n, "auc_roc");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // average ranks over tie groups
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos_ranks = 0.0;
    std::size_t num_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (positives[k]) {
            pos_ranks += rank[k];
            ++num_pos;
        }
    }
    const double p = static_cast<double>(num_pos);
    const double u = pos_ranks - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(n - num_pos));
}

double auc_pr(std::span<const double> scores, const std::vector<char>& positives) {
    const std::size_t n = scores.size();
    if (positives.size() != n) throw ShapeError("auc_pr: size mismatch");
    check_two_classes(positives, n, "auc_pr");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::size_t num_pos = 0;
    for (char p : positives) num_pos += p ? 1 : 0;

    double ap = 0.0;
    std::size_t tp = 0, seen = 0, i = 0;
    while (i < n) {
        std::size_t j = i;
        std::size_t tp_group = positives[order[i]] ? 1 : 0;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
            tp_group += positives[order[j]] ? 1 : 0;
        }
        tp += tp_group;
        seen = j + 1;
        if (tp_group > 0) {
            const double precision = static_cast<double>(tp) / static_cast<double>(seen);
            ap += precision * static_cast<double>(tp_group) / static_cast<double>(num_pos);
        }
        i = j + 1;
    }
    return ap;
}

}  // namespace gpn
