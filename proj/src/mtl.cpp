#include "rfmtl/mtl.hpp"

#include <cmath>
#include <string>

#include "rfmtl/errors.hpp"
#include "rfmtl/loss.hpp"

namespace rfmtl {

void MtlConfig::validate() const {
    if (c_sh < 1 || c_m < 1 || c_s < 1 || f_m < 1 || f_s < 1 || kernel < 1)
        throw ConfigError("model config: all layer sizes must be >= 1");
    for (float r : {dropout_shared, dropout_task_conv, dropout_task_dense})
        if (r < 0.0f || r >= 1.0f) throw ConfigError("model config: dropout rates must be in [0,1)");
    if (num_mod_classes < 1 || num_sig_classes < 1)
        throw ConfigError("model config: class counts must be >= 1");
    if (augment_noise_stddev < 0.0f)
        throw ConfigError("model config: noise stddev must be >= 0");
}

void LossWeights::validate() const {
    if (w_m < 0.0f || w_s < 0.0f) throw ConfigError("loss weights must be non-negative");
    if (std::fabs((double)w_m + (double)w_s - 1.0) > 1e-6)
        throw ConfigError("loss weights must sum to 1");
}

namespace {

// Appends a layer, threading the per-sample shape through the stack.
void push(std::vector<Layer>& layers, std::vector<std::size_t>& shape, const LayerSpec& spec,
          const std::string& branch, Rng& rng) {
    const std::string prefix = layer_kind_name(spec.kind) + std::to_string(layers.size());
    layers.emplace_back(spec, shape, prefix, branch, rng);
    shape = layers.back().out_shape();
}

void build_branch(std::vector<Layer>& layers, std::vector<std::size_t> shape,
                  const std::string& branch, const MtlConfig& cfg, std::size_t conv_kernels,
                  std::size_t dense_units, std::size_t num_classes, Rng& rng) {
    push(layers, shape, LayerSpec::conv2d(cfg.kernel, cfg.kernel, conv_kernels), branch, rng);
    push(layers, shape, LayerSpec::batchnorm(), branch, rng);
    push(layers, shape, LayerSpec::relu(), branch, rng);
    push(layers, shape, LayerSpec::dropout(cfg.dropout_task_conv), branch, rng);
    push(layers, shape, LayerSpec::flatten(), branch, rng);
    push(layers, shape, LayerSpec::dense(dense_units), branch, rng);
    push(layers, shape, LayerSpec::relu(), branch, rng);
    push(layers, shape, LayerSpec::dropout(cfg.dropout_task_dense), branch, rng);
    push(layers, shape, LayerSpec::dense(num_classes), branch, rng);
    push(layers, shape, LayerSpec::softmax(), branch, rng);
}

}  // namespace

ModelGraph build_model(const MtlConfig& cfg, std::uint64_t init_seed,
                       std::vector<std::size_t> input_shape) {
    cfg.validate();
    Rng rng(derive_seed(init_seed, 0x1217));

    ModelGraph g;
    std::vector<std::size_t> shape = std::move(input_shape);
    push(g.trunk, shape, LayerSpec::conv2d(cfg.kernel, cfg.kernel, cfg.c_sh), "sh", rng);
    push(g.trunk, shape, LayerSpec::batchnorm(), "sh", rng);
    push(g.trunk, shape, LayerSpec::relu(), "sh", rng);
    push(g.trunk, shape, LayerSpec::maxpool(2, 1), "sh", rng);
    push(g.trunk, shape, LayerSpec::dropout(cfg.dropout_shared), "sh", rng);
    push(g.trunk, shape, LayerSpec::gaussian_noise(cfg.augment_noise_stddev), "sh", rng);

    build_branch(g.mod_branch, shape, "m", cfg, cfg.c_m, cfg.f_m, cfg.num_mod_classes, rng);
    build_branch(g.sig_branch, shape, "s", cfg, cfg.c_s, cfg.f_s, cfg.num_sig_classes, rng);
    return g;
}

JointLoss joint_loss(const Tensor& mod_probs, const Tensor& sig_probs,
                     const std::vector<int>& mod_labels, const std::vector<int>& sig_labels,
                     const LossWeights& w, std::size_t* clamp_count) {
    w.validate();
    JointLoss out;
    out.mod = cross_entropy(mod_probs, mod_labels, clamp_count);
    out.sig = cross_entropy(sig_probs, sig_labels, clamp_count);
    out.mtl = (double)w.w_m * out.mod + (double)w.w_s * out.sig;
    return out;
}

std::pair<Tensor, Tensor> joint_loss_grad(const Tensor& mod_probs, const Tensor& sig_probs,
                                          const std::vector<int>& mod_labels,
                                          const std::vector<int>& sig_labels,
                                          const LossWeights& w) {
    return {cross_entropy_grad(mod_probs, mod_labels, w.w_m),
            cross_entropy_grad(sig_probs, sig_labels, w.w_s)};
}

std::pair<std::vector<float>, std::vector<float>> predict(const ModelGraph& model,
                                                          const ComplexFrame& frame) {
    const Tensor x = frame_to_tensor(frame);
    const ForwardResult r = model.forward_infer(x);
    return {r.mod_probs.values(), r.sig_probs.values()};
}

}  // namespace rfmtl
