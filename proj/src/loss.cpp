#include "rfmtl/loss.hpp"

#include <algorithm>
#include <cmath>

#include "rfmtl/errors.hpp"

namespace rfmtl {

namespace {

void check_rows(const Tensor& probs, const std::vector<int>& labels) {
    if (probs.rank() != 2) throw DimensionError("cross_entropy expects [N,K] probabilities");
    if (probs.dim(0) != labels.size())
        throw DimensionError("cross_entropy: row count does not match label count");
    const int k = (int)probs.dim(1);
    for (int l : labels)
        if (l < 0 || l >= k) throw NumericInputError("cross_entropy: label out of range");
}

}  // namespace

double cross_entropy(const Tensor& probs, const std::vector<int>& labels,
                     std::size_t* clamp_count) {
    check_rows(probs, labels);
    const std::size_t n = labels.size();
    const std::size_t k = probs.dim(1);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = probs[i * k + (std::size_t)labels[i]];
        if (p < kLogFloor) {
            p = kLogFloor;
            if (clamp_count) ++*clamp_count;
        }
        sum -= std::log(p);
    }
    return sum / (double)n;
}

Tensor cross_entropy_grad(const Tensor& probs, const std::vector<int>& labels, float scale) {
    check_rows(probs, labels);
    const std::size_t n = labels.size();
    const std::size_t k = probs.dim(1);
    Tensor g(probs.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::max((double)probs[i * k + (std::size_t)labels[i]], kLogFloor);
        g[i * k + (std::size_t)labels[i]] = (float)(-(double)scale / ((double)n * p));
    }
    return g;
}

double accuracy(const Tensor& probs, const std::vector<int>& labels) {
    check_rows(probs, labels);
    const std::size_t n = labels.size();
    if (n == 0) return 0.0;
    const std::size_t k = probs.dim(1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const float* row = probs.data() + i * k;
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (row[j] > row[best]) best = j;
        if ((int)best == labels[i]) ++hits;
    }
    return (double)hits / (double)n;
}

}  // namespace rfmtl
