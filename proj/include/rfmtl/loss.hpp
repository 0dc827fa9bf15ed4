#pragma once

#include <cstddef>
#include <vector>

#include "rfmtl/tensor.hpp"

namespace rfmtl {

// Floor applied to a probability before taking its log, so a confidently
// wrong prediction yields a large but finite loss.
inline constexpr double kLogFloor = 1e-12;

// Mean categorical cross-entropy of probability rows [N,K] against integer
// labels. Each time the true-label probability gets floored at kLogFloor,
// *clamp_count (when supplied) is incremented.
double cross_entropy(const Tensor& probs, const std::vector<int>& labels,
                     std::size_t* clamp_count = nullptr);

// Gradient of scale * cross_entropy w.r.t. probs: -(scale/N)/p at the true
// label (with the same floor), zero elsewhere.
Tensor cross_entropy_grad(const Tensor& probs, const std::vector<int>& labels, float scale);

// Fraction of rows whose argmax equals the label.
double accuracy(const Tensor& probs, const std::vector<int>& labels);

}  // namespace rfmtl
