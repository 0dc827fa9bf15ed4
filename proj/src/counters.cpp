#include "rfmtl/counters.hpp"

namespace rfmtl {

std::size_t count_flops(const LayerSpec& spec, const std::vector<std::size_t>& in_shape) {
    const std::vector<std::size_t> out = infer_output_shape(spec, in_shape);
    switch (spec.kind) {
        case LayerKind::Conv2D:
            // N_out * H_out * W_out * kh * kw * depth
            return spec.num_kernels * out[0] * out[1] * spec.kernel_h * spec.kernel_w *
                   in_shape[2];
        case LayerKind::Dense:
            return in_shape[0] * spec.units;
        default:
            return 0;
    }
}

ParamCount count_params(const LayerSpec& spec, const std::vector<std::size_t>& in_shape) {
    ParamCount c;
    switch (spec.kind) {
        case LayerKind::Conv2D:
            c.weights = spec.kernel_h * spec.kernel_w * in_shape[2] * spec.num_kernels;
            c.biases = spec.num_kernels;
            break;
        case LayerKind::Dense:
            c.weights = in_shape[0] * spec.units;
            c.biases = spec.units;
            break;
        case LayerKind::BatchNorm:
            c.bn_learnable = 2 * in_shape.back();
            c.bn_running = 2 * in_shape.back();
            break;
        default:
            break;
    }
    return c;
}

GraphCost graph_cost(const ModelGraph& graph) {
    GraphCost cost;
    for (const auto* layers : {&graph.trunk, &graph.mod_branch, &graph.sig_branch})
        for (const Layer& l : *layers) {
            const std::size_t f = count_flops(l.spec(), l.in_shape());
            cost.mac_flops += f;
            if (l.spec().kind == LayerKind::Dense) cost.dense_macs += f;
            cost.params += count_params(l.spec(), l.in_shape());
        }
    return cost;
}

}  // namespace rfmtl
