#pragma once

#include <cstddef>
#include <vector>

#include "rfmtl/graph.hpp"
#include "rfmtl/layers.hpp"

namespace rfmtl {

// Compute cost of one layer under the 1 multiply-accumulate = 1 FLOP
// convention: conv counts N_out * H_out * W_out * kh * kw * depth, dense
// counts in * out, everything else counts zero. Pure function of shapes.
std::size_t count_flops(const LayerSpec& spec, const std::vector<std::size_t>& in_shape);

struct ParamCount {
    std::size_t weights = 0;       // conv/dense weight matrices
    std::size_t biases = 0;        // conv/dense bias vectors
    std::size_t bn_learnable = 0;  // batch-norm gamma and beta
    std::size_t bn_running = 0;    // batch-norm running moments (not trainable)

    // Learnable totals with and without bias vectors; running moments are
    // reported separately and belong to neither.
    std::size_t biasless() const { return weights + bn_learnable; }
    std::size_t total() const { return weights + biases + bn_learnable; }

    ParamCount& operator+=(const ParamCount& o) {
        weights += o.weights;
        biases += o.biases;
        bn_learnable += o.bn_learnable;
        bn_running += o.bn_running;
        return *this;
    }
};

ParamCount count_params(const LayerSpec& spec, const std::vector<std::size_t>& in_shape);

struct GraphCost {
    std::size_t mac_flops = 0;   // per-layer counts summed over the whole graph
    std::size_t dense_macs = 0;  // the dense-layer share of mac_flops
    ParamCount params;

    // Profiler-style figure: counts a dense multiply-accumulate as two
    // operations and skips convolutions, the way common graph profilers of
    // the Keras/TF1 era reported model FLOPs. Kept so size/compute reports
    // can be compared against numbers produced by those tools.
    std::size_t profiler_style_flops() const { return 2 * dense_macs; }
};

GraphCost graph_cost(const ModelGraph& graph);

}  // namespace rfmtl
