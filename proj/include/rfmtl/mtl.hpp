#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rfmtl/framing.hpp"
#include "rfmtl/graph.hpp"

namespace rfmtl {

// Architecture knobs, written (C_sh, C_m, F_m, C_s, F_s) elsewhere in the
// tooling. The canonical instance is (8, 4, 256, 4, 256).
struct MtlConfig {
    std::size_t c_sh = 8;  // shared-trunk conv kernels
    std::size_t c_m = 4;   // modulation-branch conv kernels
    std::size_t f_m = 256; // modulation-branch dense width
    std::size_t c_s = 4;   // signal-branch conv kernels
    std::size_t f_s = 256; // signal-branch dense width
    std::size_t kernel = 3;
    float dropout_shared = 0.25f;
    float dropout_task_conv = 0.25f;
    float dropout_task_dense = 0.5f;
    std::size_t num_mod_classes = 9;
    std::size_t num_sig_classes = 11;
    float augment_noise_stddev = 0.1f;  // last shared layer, train only

    void validate() const;  // throws ConfigError
};

struct LossWeights {
    float w_m = 0.2f;
    float w_s = 0.8f;

    void validate() const;  // w_m, w_s >= 0 and w_m + w_s == 1
};

struct JointLoss {
    double mtl = 0.0;  // w_m * mod + w_s * sig
    double mod = 0.0;
    double sig = 0.0;
};

// Assembles the two-headed graph:
//   trunk: conv 3x3 xC_sh -> BN -> ReLU -> maxpool 2x2 stride 1 -> dropout
//          -> gaussian noise (train only)
//   each branch: conv 3x3 xC -> BN -> ReLU -> dropout -> flatten -> dense F
//          -> ReLU -> dropout -> dense heads (9 / 11) -> softmax
// Weights are initialized from init_seed.
ModelGraph build_model(const MtlConfig& cfg, std::uint64_t init_seed,
                       std::vector<std::size_t> input_shape = {16, 16, 1});

JointLoss joint_loss(const Tensor& mod_probs, const Tensor& sig_probs,
                     const std::vector<int>& mod_labels, const std::vector<int>& sig_labels,
                     const LossWeights& w, std::size_t* clamp_count = nullptr);

// Head gradients of the joint loss w.r.t. the two probability tensors,
// ready to feed ModelGraph::backward.
std::pair<Tensor, Tensor> joint_loss_grad(const Tensor& mod_probs, const Tensor& sig_probs,
                                          const std::vector<int>& mod_labels,
                                          const std::vector<int>& sig_labels,
                                          const LossWeights& w);

// Single-frame inference: returns the two probability vectors.
std::pair<std::vector<float>, std::vector<float>> predict(const ModelGraph& model,
                                                          const ComplexFrame& frame);

}  // namespace rfmtl
