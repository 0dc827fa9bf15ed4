#include "rfmtl/layers.hpp"

#include <cmath>

#include "rfmtl/errors.hpp"
#include "rfmtl/kernels.hpp"

namespace rfmtl {

const char* layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2D: return "conv2d";
        case LayerKind::MaxPool2D: return "maxpool2d";
        case LayerKind::BatchNorm: return "batchnorm";
        case LayerKind::ReLU: return "relu";
        case LayerKind::Dense: return "dense";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::GaussianNoise: return "gaussian_noise";
        case LayerKind::Flatten: return "flatten";
        case LayerKind::Softmax: return "softmax";
    }
    throw ConfigError("unknown layer kind");
}

LayerKind layer_kind_from_name(const std::string& name) {
    for (auto k : {LayerKind::Conv2D, LayerKind::MaxPool2D, LayerKind::BatchNorm, LayerKind::ReLU,
                   LayerKind::Dense, LayerKind::Dropout, LayerKind::GaussianNoise,
                   LayerKind::Flatten, LayerKind::Softmax})
        if (name == layer_kind_name(k)) return k;
    throw ConfigError("unknown layer kind name: " + name);
}

LayerSpec LayerSpec::conv2d(std::size_t kh, std::size_t kw, std::size_t n, std::size_t stride,
                            std::size_t padding) {
    LayerSpec s;
    s.kind = LayerKind::Conv2D;
    s.kernel_h = kh;
    s.kernel_w = kw;
    s.num_kernels = n;
    s.stride = stride;
    s.padding = padding;
    if (kh < 1 || kw < 1 || n < 1 || stride < 1) throw ConfigError("conv2d spec: bad dimensions");
    return s;
}

LayerSpec LayerSpec::maxpool(std::size_t pool, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::MaxPool2D;
    s.pool = pool;
    s.pool_stride = stride;
    if (pool < 1 || stride < 1) throw ConfigError("maxpool spec: bad dimensions");
    return s;
}

LayerSpec LayerSpec::batchnorm() {
    LayerSpec s;
    s.kind = LayerKind::BatchNorm;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::ReLU;
    return s;
}

LayerSpec LayerSpec::dense(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::Dense;
    s.units = units;
    if (units < 1) throw ConfigError("dense spec: units must be >= 1");
    return s;
}

LayerSpec LayerSpec::dropout(float rate) {
    LayerSpec s;
    s.kind = LayerKind::Dropout;
    s.rate = rate;
    if (rate < 0.0f || rate >= 1.0f) throw ConfigError("dropout spec: rate must be in [0,1)");
    return s;
}

LayerSpec LayerSpec::gaussian_noise(float stddev) {
    LayerSpec s;
    s.kind = LayerKind::GaussianNoise;
    s.stddev = stddev;
    if (stddev < 0.0f) throw ConfigError("gaussian_noise spec: stddev must be >= 0");
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::Flatten;
    return s;
}

LayerSpec LayerSpec::softmax() {
    LayerSpec s;
    s.kind = LayerKind::Softmax;
    return s;
}

std::vector<std::size_t> infer_output_shape(const LayerSpec& spec,
                                            const std::vector<std::size_t>& in) {
    switch (spec.kind) {
        case LayerKind::Conv2D: {
            if (in.size() != 3) throw ConfigError("conv2d needs an [H,W,C] input");
            const std::size_t H = in[0], W = in[1];
            if (H + 2 * spec.padding < spec.kernel_h || W + 2 * spec.padding < spec.kernel_w)
                throw ConfigError("conv2d kernel larger than (padded) input map");
            return {(H + 2 * spec.padding - spec.kernel_h) / spec.stride + 1,
                    (W + 2 * spec.padding - spec.kernel_w) / spec.stride + 1, spec.num_kernels};
        }
        case LayerKind::MaxPool2D: {
            if (in.size() != 3) throw ConfigError("maxpool needs an [H,W,C] input");
            if (in[0] < spec.pool || in[1] < spec.pool)
                throw ConfigError("maxpool window larger than input map");
            return {(in[0] - spec.pool) / spec.pool_stride + 1,
                    (in[1] - spec.pool) / spec.pool_stride + 1, in[2]};
        }
        case LayerKind::Flatten: {
            std::size_t f = 1;
            for (std::size_t d : in) f *= d;
            return {f};
        }
        case LayerKind::Dense: {
            if (in.size() != 1) throw ConfigError("dense needs a flattened input");
            return {spec.units};
        }
        case LayerKind::BatchNorm:
            if (in.size() != 3) throw ConfigError("batchnorm operates on [H,W,C] maps here");
            return in;
        case LayerKind::ReLU:
        case LayerKind::Dropout:
        case LayerKind::GaussianNoise:
        case LayerKind::Softmax:
            return in;
    }
    throw ConfigError("unknown layer kind");
}

std::vector<std::size_t> batched(std::size_t n, const std::vector<std::size_t>& per_sample) {
    std::vector<std::size_t> out;
    out.reserve(per_sample.size() + 1);
    out.push_back(n);
    out.insert(out.end(), per_sample.begin(), per_sample.end());
    return out;
}

Layer::Layer(LayerSpec spec, std::vector<std::size_t> in_shape, const std::string& name_prefix,
             std::string branch, Rng& init_rng)
    : spec_(spec), in_shape_(std::move(in_shape)) {
    out_shape_ = infer_output_shape(spec_, in_shape_);
    const std::string base = branch + "/" + name_prefix;

    auto setup = [&](Param& p, const std::string& tensor_name, std::vector<std::size_t> shape,
                     bool quantizable) {
        p.name = base + "/" + tensor_name;
        p.branch = branch;
        p.value = Tensor(std::move(shape));
        p.quantizable = quantizable;
        p.allocate_state();
    };

    switch (spec_.kind) {
        case LayerKind::Conv2D: {
            const std::size_t ci = in_shape_[2];
            setup(w_, "w", {spec_.kernel_h, spec_.kernel_w, ci, spec_.num_kernels}, true);
            setup(b_, "b", {spec_.num_kernels}, false);
            const float limit =
                std::sqrt(6.0f / (float)(spec_.kernel_h * spec_.kernel_w * ci));
            w_.value.fill_uniform(init_rng, -limit, limit);
            break;
        }
        case LayerKind::Dense: {
            const std::size_t in = in_shape_[0];
            setup(w_, "w", {in, spec_.units}, true);
            setup(b_, "b", {spec_.units}, false);
            const float limit = std::sqrt(6.0f / (float)in);
            w_.value.fill_uniform(init_rng, -limit, limit);
            break;
        }
        case LayerKind::BatchNorm: {
            const std::size_t c = in_shape_.back();
            setup(gamma_, "gamma", {c}, false);
            setup(beta_, "beta", {c}, false);
            gamma_.value.fill(1.0f);
            running_mean_ = Tensor({c});
            running_var_ = Tensor({c}, 1.0f);
            break;
        }
        default:
            break;  // parameter-free layer
    }
}

std::vector<Param*> Layer::params() {
    std::vector<Param*> out;
    for (Param* p : {&w_, &b_, &gamma_, &beta_})
        if (p->present()) out.push_back(p);
    return out;
}

std::vector<const Param*> Layer::params() const {
    std::vector<const Param*> out;
    for (const Param* p : {&w_, &b_, &gamma_, &beta_})
        if (p->present()) out.push_back(p);
    return out;
}

Tensor Layer::forward_train(const Tensor& x, Rng& rng, LayerCache& cache) {
    cache = LayerCache{};
    Tensor y;
    switch (spec_.kind) {
        case LayerKind::Conv2D:
            cache.x = x;
            kern::conv2d_forward(x, w_.value, b_.value, spec_.stride, spec_.padding, y);
            break;
        case LayerKind::MaxPool2D:
            cache.x = x;
            kern::maxpool_forward(x, spec_.pool, spec_.pool_stride, y, cache.argmax);
            break;
        case LayerKind::BatchNorm: {
            Tensor mean;
            kern::batchnorm_forward_train(x, gamma_.value, beta_.value, kBnEps, kBnMomentum,
                                          running_mean_, running_var_, y, mean, cache.inv_std,
                                          cache.xhat);
            break;
        }
        case LayerKind::ReLU:
            cache.x = x;
            kern::relu_forward(x, y);
            break;
        case LayerKind::Dense:
            cache.x = x;
            kern::dense_forward(x, w_.value, b_.value, y);
            break;
        case LayerKind::Dropout: {
            cache.mask = Tensor(x.shape());
            const float keep_scale = 1.0f / (1.0f - spec_.rate);
            for (std::size_t i = 0; i < cache.mask.size(); ++i)
                cache.mask[i] = rng.bernoulli(spec_.rate) ? 0.0f : keep_scale;
            kern::mul_elementwise(x, cache.mask, y);
            break;
        }
        case LayerKind::GaussianNoise: {
            y = x;
            for (std::size_t i = 0; i < y.size(); ++i)
                y[i] += (float)rng.gaussian(0.0, spec_.stddev);
            break;
        }
        case LayerKind::Flatten: {
            cache.x = x;
            y = x;
            y.reshape(batched(x.dim(0), out_shape_));
            break;
        }
        case LayerKind::Softmax:
            kern::softmax_forward(x, y);
            cache.y = y;
            break;
    }
    cache.valid = true;
    return y;
}

Tensor Layer::forward_infer(const Tensor& x) const {
    Tensor y;
    switch (spec_.kind) {
        case LayerKind::Conv2D:
            kern::conv2d_forward(x, w_.value, b_.value, spec_.stride, spec_.padding, y);
            break;
        case LayerKind::MaxPool2D: {
            BasicTensor<std::size_t> argmax;
            kern::maxpool_forward(x, spec_.pool, spec_.pool_stride, y, argmax);
            break;
        }
        case LayerKind::BatchNorm:
            kern::batchnorm_forward_infer(x, gamma_.value, beta_.value, running_mean_,
                                          running_var_, kBnEps, y);
            break;
        case LayerKind::ReLU:
            kern::relu_forward(x, y);
            break;
        case LayerKind::Dense:
            kern::dense_forward(x, w_.value, b_.value, y);
            break;
        case LayerKind::Dropout:
        case LayerKind::GaussianNoise:
            y = x;  // augmentation layers are identity maps outside training
            break;
        case LayerKind::Flatten:
            y = x;
            y.reshape(batched(x.dim(0), out_shape_));
            break;
        case LayerKind::Softmax:
            kern::softmax_forward(x, y);
            break;
    }
    return y;
}

Tensor Layer::backward(const Tensor& dy, LayerCache& cache) {
    if (!cache.valid)
        throw StateError(std::string("backward on ") + layer_kind_name(spec_.kind) +
                         " without a cached forward pass");
    Tensor dx;
    switch (spec_.kind) {
        case LayerKind::Conv2D:
            kern::conv2d_backward(cache.x, w_.value, dy, spec_.stride, spec_.padding, dx, w_.grad,
                                  b_.grad);
            break;
        case LayerKind::MaxPool2D:
            dx = Tensor(cache.x.shape());
            kern::maxpool_backward(dy, cache.argmax, dx);
            break;
        case LayerKind::BatchNorm:
            kern::batchnorm_backward(dy, cache.xhat, gamma_.value, cache.inv_std, dx, gamma_.grad,
                                     beta_.grad);
            break;
        case LayerKind::ReLU:
            kern::relu_backward(cache.x, dy, dx);
            break;
        case LayerKind::Dense:
            kern::dense_backward(cache.x, w_.value, dy, dx, w_.grad, b_.grad);
            break;
        case LayerKind::Dropout:
            kern::mul_elementwise(dy, cache.mask, dx);
            break;
        case LayerKind::GaussianNoise:
            dx = dy;  // additive noise: gradient passes through unchanged
            break;
        case LayerKind::Flatten:
            dx = dy;
            dx.reshape(cache.x.shape());
            break;
        case LayerKind::Softmax:
            kern::softmax_backward(cache.y, dy, dx);
            break;
    }
    cache.valid = false;
    return dx;
}

}  // namespace rfmtl
