#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfmtl/rng.hpp"
#include "rfmtl/tensor.hpp"

namespace rfmtl {

enum class LayerKind : std::uint8_t {
    Conv2D,
    MaxPool2D,
    BatchNorm,
    ReLU,
    Dense,
    Dropout,
    GaussianNoise,
    Flatten,
    Softmax,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    std::size_t kernel_h = 0, kernel_w = 0;  // Conv2D
    std::size_t num_kernels = 0;             // Conv2D output channels
    std::size_t stride = 1, padding = 0;     // Conv2D
    std::size_t pool = 0;                    // MaxPool2D window (square)
    std::size_t pool_stride = 1;             // MaxPool2D
    std::size_t units = 0;                   // Dense
    float rate = 0.0f;                       // Dropout
    float stddev = 0.0f;                     // GaussianNoise

    static LayerSpec conv2d(std::size_t kh, std::size_t kw, std::size_t n, std::size_t stride = 1,
                            std::size_t padding = 0);
    static LayerSpec maxpool(std::size_t pool, std::size_t stride);
    static LayerSpec batchnorm();
    static LayerSpec relu();
    static LayerSpec dense(std::size_t units);
    static LayerSpec dropout(float rate);
    static LayerSpec gaussian_noise(float stddev);
    static LayerSpec flatten();
    static LayerSpec softmax();
};

// Per-sample output shape for a per-sample input shape ([H,W,C] or [F]).
// Throws ConfigError when the spec cannot consume the shape (kernel larger
// than map, dense on unflattened input, and so on).
std::vector<std::size_t> infer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in);

// One learnable tensor plus its gradient and Adam state. A default-constructed
// Param (empty value) means the slot is unused by the layer.
struct Param {
    std::string name;    // e.g. "m/conv0/w"
    std::string branch;  // "sh", "m", or "s"
    Tensor value;
    Tensor grad;
    Tensor adam_m, adam_v;
    std::int64_t adam_step = 0;
    bool quantizable = false;  // true only for conv/dense weight matrices

    bool present() const { return !value.empty(); }
    void allocate_state() {
        grad = Tensor(value.shape());
        adam_m = Tensor(value.shape());
        adam_v = Tensor(value.shape());
        adam_step = 0;
    }
};

// Activations the backward pass needs, captured by the train-mode forward.
// Owned by the trainer, not the layer, so frozen graphs stay const-shareable.
struct LayerCache {
    Tensor x;
    Tensor y;        // softmax output
    Tensor xhat;     // batch-norm normalized input
    Tensor inv_std;  // batch-norm per-channel 1/sqrt(var+eps)
    Tensor mask;     // dropout keep/scale mask
    BasicTensor<std::size_t> argmax;  // max-pool winners
    bool valid = false;
};

class Layer {
public:
    // Allocates and initializes parameters for the given per-sample input
    // shape. Conv/dense weights draw from a fan-in-scaled uniform
    // (+-sqrt(6/fan_in)); biases start at zero, batch-norm at gamma=1/beta=0
    // with running moments (0, 1).
    Layer(LayerSpec spec, std::vector<std::size_t> in_shape, const std::string& name_prefix,
          std::string branch, Rng& init_rng);

    const LayerSpec& spec() const { return spec_; }
    const std::vector<std::size_t>& in_shape() const { return in_shape_; }
    const std::vector<std::size_t>& out_shape() const { return out_shape_; }

    // Train-mode forward: records what backward needs into `cache`, draws
    // dropout masks and noise from `rng`, and (batch norm) updates running
    // moments. Input/output are batched: [N, ...shape].
    Tensor forward_train(const Tensor& x, Rng& rng, LayerCache& cache);

    // Inference forward: no caching, no mutation; dropout and noise are
    // identity maps. Safe to call concurrently on a frozen graph.
    Tensor forward_infer(const Tensor& x) const;

    // Reverse-mode step. Writes parameter gradients and returns the gradient
    // w.r.t. the layer input. Throws StateError when `cache` is not the
    // result of a preceding forward_train.
    Tensor backward(const Tensor& dy, LayerCache& cache);

    // Parameter slots in a fixed order (weight, bias, gamma, beta); absent
    // slots are skipped by the graph-level collector.
    std::vector<Param*> params();
    std::vector<const Param*> params() const;

    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }
    const Tensor& running_mean() const { return running_mean_; }
    const Tensor& running_var() const { return running_var_; }

    static constexpr float kBnEps = 1e-5f;
    static constexpr float kBnMomentum = 0.99f;

private:
    LayerSpec spec_;
    std::vector<std::size_t> in_shape_, out_shape_;
    Param w_, b_, gamma_, beta_;
    Tensor running_mean_, running_var_;

    friend class ModelGraph;
};

// Batched shape helper: [N] + per-sample shape.
std::vector<std::size_t> batched(std::size_t n, const std::vector<std::size_t>& per_sample);

}  // namespace rfmtl
