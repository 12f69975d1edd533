#pragma once

#include <span>
#include <vector>

#include "gpn/tensor.hpp"

namespace gpn {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels,
                const std::vector<char>& mask);

// (1/C) * mean over masked nodes of the squared L2 distance between the
// predicted row and the one-hot label. In [0, 2/C].
double brier(const TensorPtr& probs, const std::vector<int>& labels,
             const std::vector<char>& mask);

// Expected calibration error over equal-width max-probability bins;
// bin m covers (m/M, (m+1)/M], the first bin is closed at 0.
double ece(const TensorPtr& probs, const std::vector<int>& preds, const std::vector<int>& labels,
           const std::vector<char>& mask, std::size_t bins = 10);

// Mann-Whitney rank statistic with average ranks for ties.
double auc_roc(std::span<const double> scores, const std::vector<char>& positives);

// Average precision: step-wise sum of precision at each positive, descending
// score, tie groups handled atomically.
double auc_pr(std::span<const double> scores, const std::vector<char>& positives);

}  // namespace gpn
