#include "rfmtl/graph.hpp"

#include "rfmtl/errors.hpp"

namespace rfmtl {

namespace {

Tensor run_train(std::vector<Layer>& layers, std::vector<LayerCache>& caches, Tensor x, Rng& rng) {
    caches.resize(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) x = layers[i].forward_train(x, rng, caches[i]);
    return x;
}

Tensor run_infer(const std::vector<Layer>& layers, Tensor x) {
    for (const Layer& l : layers) x = l.forward_infer(x);
    return x;
}

Tensor run_backward(std::vector<Layer>& layers, std::vector<LayerCache>& caches, Tensor dy) {
    if (caches.size() != layers.size())
        throw StateError("backward called without a preceding train-mode forward");
    for (std::size_t i = layers.size(); i-- > 0;) dy = layers[i].backward(dy, caches[i]);
    return dy;
}

}  // namespace

ForwardResult ModelGraph::forward_train(const Tensor& x, Rng& rng) {
    Tensor shared = run_train(trunk, trunk_cache_, x, rng);
    ForwardResult out;
    out.mod_probs = run_train(mod_branch, mod_cache_, shared, rng);
    out.sig_probs = run_train(sig_branch, sig_cache_, shared, rng);
    return out;
}

ForwardResult ModelGraph::forward_infer(const Tensor& x) const {
    Tensor shared = run_infer(trunk, x);
    ForwardResult out;
    out.mod_probs = run_infer(mod_branch, shared);
    out.sig_probs = run_infer(sig_branch, shared);
    return out;
}

Tensor ModelGraph::backward(const Tensor& dmod, const Tensor& dsig) {
    Tensor d_shared_mod = run_backward(mod_branch, mod_cache_, dmod);
    Tensor d_shared_sig = run_backward(sig_branch, sig_cache_, dsig);
    if (!d_shared_mod.same_shape(d_shared_sig))
        throw DimensionError("branch gradients disagree on the trunk output shape");
    for (std::size_t i = 0; i < d_shared_mod.size(); ++i) d_shared_mod[i] += d_shared_sig[i];
    return run_backward(trunk, trunk_cache_, d_shared_mod);
}

std::vector<Param*> ModelGraph::params() {
    std::vector<Param*> out;
    for (auto* layers : {&trunk, &mod_branch, &sig_branch})
        for (Layer& l : *layers)
            for (Param* p : l.params()) out.push_back(p);
    return out;
}

std::vector<const Param*> ModelGraph::params() const {
    std::vector<const Param*> out;
    for (const auto* layers : {&trunk, &mod_branch, &sig_branch})
        for (const Layer& l : *layers)
            for (const Param* p : l.params()) out.push_back(p);
    return out;
}

}  // namespace rfmtl
