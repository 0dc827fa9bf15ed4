#include "rfmtl/adam.hpp"

#include <cmath>

#include "rfmtl/errors.hpp"

namespace rfmtl {

void adam_step(Param& p, const AdamConfig& cfg) {
    if (!p.grad.all_finite()) throw OptimizerError("non-finite gradient in " + p.name);
    p.adam_step += 1;
    const float bc1 = 1.0f - std::pow(cfg.beta1, (float)p.adam_step);
    const float bc2 = 1.0f - std::pow(cfg.beta2, (float)p.adam_step);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
        const float g = p.grad[i];
        p.adam_m[i] = cfg.beta1 * p.adam_m[i] + (1.0f - cfg.beta1) * g;
        p.adam_v[i] = cfg.beta2 * p.adam_v[i] + (1.0f - cfg.beta2) * g * g;
        const float mhat = p.adam_m[i] / bc1;
        const float vhat = p.adam_v[i] / bc2;
        p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

void adam_step_all(const std::vector<Param*>& params, const AdamConfig& cfg) {
    for (Param* p : params) adam_step(*p, cfg);
}

}  // namespace rfmtl
