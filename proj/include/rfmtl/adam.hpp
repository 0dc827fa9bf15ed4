#pragma once

#include <vector>

#include "rfmtl/layers.hpp"

namespace rfmtl {

struct AdamConfig {
    float lr = 0.001f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// Standard bias-corrected Adam update, in place, consuming p.grad. Throws
// OptimizerError naming the tensor when its gradient is not finite.
void adam_step(Param& p, const AdamConfig& cfg);

void adam_step_all(const std::vector<Param*>& params, const AdamConfig& cfg);

}  // namespace rfmtl
