#pragma once

#include <vector>

#include "rfmtl/layers.hpp"

namespace rfmtl {

struct ForwardResult {
    Tensor mod_probs;  // [N, 9]
    Tensor sig_probs;  // [N, 11]
};

// Hard-parameter-shared two-headed graph: a shared trunk feeding a modulation
// branch and a signal branch. Layer vectors are public; construction lives in
// build_model (mtl.hpp) and checkpoint loading.
class ModelGraph {
public:
    std::vector<Layer> trunk;
    std::vector<Layer> mod_branch;
    std::vector<Layer> sig_branch;

    // Train-mode pass: caches activations for backward, draws augmentation
    // randomness from rng, updates batch-norm running moments.
    ForwardResult forward_train(const Tensor& x, Rng& rng);

    // Inference pass: const, cache-free, augmentation layers inert.
    ForwardResult forward_infer(const Tensor& x) const;

    // Propagates head gradients back through both branches, sums the two
    // trunk-output gradients, and continues through the trunk. Parameter
    // gradients land in each Param's grad tensor. Returns the input gradient.
    // Throws StateError unless a forward_train immediately precedes it.
    Tensor backward(const Tensor& dmod, const Tensor& dsig);

    // All present parameters in a fixed traversal order (trunk, mod, sig).
    std::vector<Param*> params();
    std::vector<const Param*> params() const;

    const std::vector<std::size_t>& input_shape() const { return trunk.front().in_shape(); }

private:
    std::vector<LayerCache> trunk_cache_, mod_cache_, sig_cache_;
};

}  // namespace rfmtl
