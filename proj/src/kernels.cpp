#include "rfmtl/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>

#include "rfmtl/errors.hpp"

namespace rfmtl::kern {

void apply_thread_cap_from_env() {
    const char* v = std::getenv("RFMTL_THREADS");
    if (!v || !*v) return;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end == v || n < 1) throw ConfigError("RFMTL_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
}

int effective_threads() {
    int n = 1;
#pragma omp parallel
    {
#pragma omp single
        n = omp_get_num_threads();
    }
    return n;
}

namespace {

using i64 = std::int64_t;

void require(bool ok, const char* what) {
    if (!ok) throw DimensionError(what);
}

}  // namespace

template <typename T>
void conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                    std::size_t stride, std::size_t pad, BasicTensor<T>& y) {
    require(x.rank() == 4, "conv2d_forward: input must be [N,H,W,C]");
    require(w.rank() == 4, "conv2d_forward: weights must be [kh,kw,Ci,Co]");
    const i64 N = (i64)x.dim(0), H = (i64)x.dim(1), W = (i64)x.dim(2), Ci = (i64)x.dim(3);
    const i64 kh = (i64)w.dim(0), kw = (i64)w.dim(1), Co = (i64)w.dim(3);
    require((i64)w.dim(2) == Ci, "conv2d_forward: kernel depth must equal input channels");
    require(stride >= 1, "conv2d_forward: stride must be >= 1");
    const i64 s = (i64)stride, p = (i64)pad;
    require(H + 2 * p >= kh && W + 2 * p >= kw, "conv2d_forward: kernel larger than padded input");
    const i64 Ho = (H + 2 * p - kh) / s + 1;
    const i64 Wo = (W + 2 * p - kw) / s + 1;
    const bool has_bias = !bias.empty();
    if (has_bias) require((i64)bias.size() == Co, "conv2d_forward: bias length must equal Co");

    y = BasicTensor<T>({(std::size_t)N, (std::size_t)Ho, (std::size_t)Wo, (std::size_t)Co});
    const T* xd = x.data();
    const T* wd = w.data();
    T* yd = y.data();

#pragma omp parallel for schedule(static)
    for (i64 slot = 0; slot < N * Ho * Wo; ++slot) {
        const i64 n = slot / (Ho * Wo);
        const i64 oh = (slot / Wo) % Ho;
        const i64 ow = slot % Wo;
        for (i64 co = 0; co < Co; ++co) {
            // All dot-product reductions in this file accumulate in double
            // (fixed order, so results stay thread-count invariant).
            double acc = has_bias ? (double)bias[(std::size_t)co] : 0.0;
            for (i64 kp = 0; kp < kh; ++kp) {
                const i64 ih = oh * s + kp - p;
                if (ih < 0 || ih >= H) continue;
                for (i64 kq = 0; kq < kw; ++kq) {
                    const i64 iw = ow * s + kq - p;
                    if (iw < 0 || iw >= W) continue;
                    const T* xrow = xd + ((n * H + ih) * W + iw) * Ci;
                    const T* wrow = wd + (kp * kw + kq) * Ci * Co + co;
                    for (i64 ci = 0; ci < Ci; ++ci)
                        acc += (double)xrow[ci] * (double)wrow[ci * Co];
                }
            }
            yd[slot * Co + co] = (T)acc;
        }
    }
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                     std::size_t stride, std::size_t pad, BasicTensor<T>& dx, BasicTensor<T>& dw,
                     BasicTensor<T>& db) {
    const i64 N = (i64)x.dim(0), H = (i64)x.dim(1), W = (i64)x.dim(2), Ci = (i64)x.dim(3);
    const i64 kh = (i64)w.dim(0), kw = (i64)w.dim(1), Co = (i64)w.dim(3);
    const i64 s = (i64)stride, p = (i64)pad;
    require(dy.rank() == 4 && (i64)dy.dim(0) == N && (i64)dy.dim(3) == Co,
            "conv2d_backward: upstream gradient shape mismatch");
    const i64 Ho = (i64)dy.dim(1), Wo = (i64)dy.dim(2);

    dx = BasicTensor<T>(x.shape());
    dw = BasicTensor<T>(w.shape());
    db = BasicTensor<T>({(std::size_t)Co});
    const T* xd = x.data();
    const T* wd = w.data();
    const T* gd = dy.data();

    // dx: each thread owns one sample's plane and scatters serially into it.
    T* dxd = dx.data();
#pragma omp parallel for schedule(static)
    for (i64 n = 0; n < N; ++n) {
        for (i64 oh = 0; oh < Ho; ++oh)
            for (i64 ow = 0; ow < Wo; ++ow) {
                const T* grow = gd + ((n * Ho + oh) * Wo + ow) * Co;
                for (i64 kp = 0; kp < kh; ++kp) {
                    const i64 ih = oh * s + kp - p;
                    if (ih < 0 || ih >= H) continue;
                    for (i64 kq = 0; kq < kw; ++kq) {
                        const i64 iw = ow * s + kq - p;
                        if (iw < 0 || iw >= W) continue;
                        T* dxrow = dxd + ((n * H + ih) * W + iw) * Ci;
                        const T* wrow = wd + (kp * kw + kq) * Ci * Co;
                        for (i64 ci = 0; ci < Ci; ++ci) {
                            double acc = 0.0;
                            for (i64 co = 0; co < Co; ++co)
                                acc += (double)wrow[ci * Co + co] * (double)grow[co];
                            dxrow[ci] += (T)acc;
                        }
                    }
                }
            }
    }

    // dw: gather over the batch per weight slot.
    T* dwd = dw.data();
#pragma omp parallel for schedule(static)
    for (i64 wslot = 0; wslot < kh * kw * Ci * Co; ++wslot) {
        const i64 kp = wslot / (kw * Ci * Co);
        const i64 kq = (wslot / (Ci * Co)) % kw;
        const i64 ci = (wslot / Co) % Ci;
        const i64 co = wslot % Co;
        double acc = 0.0;
        for (i64 n = 0; n < N; ++n)
            for (i64 oh = 0; oh < Ho; ++oh) {
                const i64 ih = oh * s + kp - p;
                if (ih < 0 || ih >= H) continue;
                for (i64 ow = 0; ow < Wo; ++ow) {
                    const i64 iw = ow * s + kq - p;
                    if (iw < 0 || iw >= W) continue;
                    acc += (double)xd[((n * H + ih) * W + iw) * Ci + ci] *
                           (double)gd[((n * Ho + oh) * Wo + ow) * Co + co];
                }
            }
        dwd[wslot] = (T)acc;
    }

    T* dbd = db.data();
#pragma omp parallel for schedule(static)
    for (i64 co = 0; co < Co; ++co) {
        double acc = 0.0;
        for (i64 n = 0; n < N; ++n)
            for (i64 oh = 0; oh < Ho; ++oh)
                for (i64 ow = 0; ow < Wo; ++ow) acc += gd[((n * Ho + oh) * Wo + ow) * Co + co];
        dbd[co] = (T)acc;
    }
}

template <typename T>
void maxpool_forward(const BasicTensor<T>& x, std::size_t pool, std::size_t stride,
                     BasicTensor<T>& y, BasicTensor<std::size_t>& argmax) {
    require(x.rank() == 4, "maxpool_forward: input must be [N,H,W,C]");
    const i64 N = (i64)x.dim(0), H = (i64)x.dim(1), W = (i64)x.dim(2), C = (i64)x.dim(3);
    const i64 k = (i64)pool, s = (i64)stride;
    require(k >= 1 && s >= 1, "maxpool_forward: pool and stride must be >= 1");
    require(H >= k && W >= k, "maxpool_forward: pool window larger than input");
    const i64 Ho = (H - k) / s + 1;
    const i64 Wo = (W - k) / s + 1;

    y = BasicTensor<T>({(std::size_t)N, (std::size_t)Ho, (std::size_t)Wo, (std::size_t)C});
    argmax = BasicTensor<std::size_t>(y.shape());
    const T* xd = x.data();
    T* yd = y.data();
    std::size_t* ad = argmax.data();

#pragma omp parallel for schedule(static)
    for (i64 slot = 0; slot < N * Ho * Wo * C; ++slot) {
        const i64 c = slot % C;
        const i64 ow = (slot / C) % Wo;
        const i64 oh = (slot / (C * Wo)) % Ho;
        const i64 n = slot / (C * Wo * Ho);
        T best = -std::numeric_limits<T>::infinity();
        i64 best_idx = -1;
        for (i64 kp = 0; kp < k; ++kp)
            for (i64 kq = 0; kq < k; ++kq) {
                const i64 idx = ((n * H + oh * s + kp) * W + ow * s + kq) * C + c;
                if (xd[idx] > best) {
                    best = xd[idx];
                    best_idx = idx;
                }
            }
        yd[slot] = best;
        ad[slot] = (std::size_t)best_idx;
    }
}

template <typename T>
void maxpool_backward(const BasicTensor<T>& dy, const BasicTensor<std::size_t>& argmax,
                      BasicTensor<T>& dx) {
    require(dy.shape() == argmax.shape(), "maxpool_backward: gradient/argmax shape mismatch");
    require(dx.rank() == 4 && dx.dim(0) == dy.dim(0) && dx.dim(3) == dy.dim(3),
            "maxpool_backward: dx must carry the pooled input's shape");
    const i64 N = (i64)dy.dim(0), Ho = (i64)dy.dim(1), Wo = (i64)dy.dim(2), C = (i64)dy.dim(3);
    dx.fill(T(0));
    const T* gd = dy.data();
    const std::size_t* ad = argmax.data();
    T* dxd = dx.data();

    // Overlapping stride-1 windows can route several outputs to one input, so
    // each thread owns a whole (n, c) plane: all additions into that plane
    // happen serially in output order.
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 n = 0; n < N; ++n)
        for (i64 c = 0; c < C; ++c)
            for (i64 oh = 0; oh < Ho; ++oh)
                for (i64 ow = 0; ow < Wo; ++ow) {
                    const i64 oslot = ((n * Ho + oh) * Wo + ow) * C + c;
                    dxd[ad[oslot]] += gd[oslot];
                }
}

template <typename T>
void dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                   BasicTensor<T>& y) {
    require(x.rank() == 2 && w.rank() == 2, "dense_forward: expects [N,In] and [In,Out]");
    const i64 N = (i64)x.dim(0), In = (i64)x.dim(1), Out = (i64)w.dim(1);
    require((i64)w.dim(0) == In, "dense_forward: weight rows must equal input width");
    const bool has_bias = !bias.empty();
    if (has_bias) require((i64)bias.size() == Out, "dense_forward: bias length must equal Out");

    y = BasicTensor<T>({(std::size_t)N, (std::size_t)Out});
    const T* xd = x.data();
    const T* wd = w.data();
    T* yd = y.data();

#pragma omp parallel for collapse(2) schedule(static)
    for (i64 n = 0; n < N; ++n)
        for (i64 o = 0; o < Out; ++o) {
            double acc = has_bias ? (double)bias[(std::size_t)o] : 0.0;
            const T* xrow = xd + n * In;
            for (i64 i = 0; i < In; ++i) acc += (double)xrow[i] * (double)wd[i * Out + o];
            yd[n * Out + o] = (T)acc;
        }
}

template <typename T>
void dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                    BasicTensor<T>& dx, BasicTensor<T>& dw, BasicTensor<T>& db) {
    const i64 N = (i64)x.dim(0), In = (i64)x.dim(1), Out = (i64)w.dim(1);
    require(dy.rank() == 2 && (i64)dy.dim(0) == N && (i64)dy.dim(1) == Out,
            "dense_backward: upstream gradient shape mismatch");

    dx = BasicTensor<T>(x.shape());
    dw = BasicTensor<T>(w.shape());
    db = BasicTensor<T>({(std::size_t)Out});
    const T* xd = x.data();
    const T* wd = w.data();
    const T* gd = dy.data();

    T* dxd = dx.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 n = 0; n < N; ++n)
        for (i64 i = 0; i < In; ++i) {
            double acc = 0.0;
            const T* grow = gd + n * Out;
            const T* wrow = wd + i * Out;
            for (i64 o = 0; o < Out; ++o) acc += (double)grow[o] * (double)wrow[o];
            dxd[n * In + i] = (T)acc;
        }

    T* dwd = dw.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (i64 i = 0; i < In; ++i)
        for (i64 o = 0; o < Out; ++o) {
            double acc = 0.0;
            for (i64 n = 0; n < N; ++n) acc += (double)xd[n * In + i] * (double)gd[n * Out + o];
            dwd[i * Out + o] = (T)acc;
        }

    T* dbd = db.data();
#pragma omp parallel for schedule(static)
    for (i64 o = 0; o < Out; ++o) {
        double acc = 0.0;
        for (i64 n = 0; n < N; ++n) acc += gd[n * Out + o];
        dbd[o] = (T)acc;
    }
}

template <typename T>
void batchnorm_forward_train(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                             const BasicTensor<T>& beta, T eps, T momentum,
                             BasicTensor<T>& running_mean, BasicTensor<T>& running_var,
                             BasicTensor<T>& y, BasicTensor<T>& save_mean,
                             BasicTensor<T>& save_inv_std, BasicTensor<T>& xhat) {
    require(x.rank() == 4, "batchnorm: input must be [N,H,W,C]");
    const i64 C = (i64)x.dim(3);
    const i64 R = (i64)(x.size() / (std::size_t)C);
    require(R >= 2, "batchnorm train mode needs at least 2 values per channel");
    require((i64)gamma.size() == C && (i64)beta.size() == C &&
                (i64)running_mean.size() == C && (i64)running_var.size() == C,
            "batchnorm: per-channel parameter length mismatch");

    y = BasicTensor<T>(x.shape());
    xhat = BasicTensor<T>(x.shape());
    save_mean = BasicTensor<T>({(std::size_t)C});
    save_inv_std = BasicTensor<T>({(std::size_t)C});
    const T* xd = x.data();

#pragma omp parallel for schedule(static)
    for (i64 c = 0; c < C; ++c) {
        double sum = 0.0;
        for (i64 r = 0; r < R; ++r) sum += xd[r * C + c];
        const T mean = (T)(sum / (double)R);
        double sq = 0.0;
        for (i64 r = 0; r < R; ++r) {
            const double d = (double)xd[r * C + c] - (double)mean;
            sq += d * d;
        }
        const T var = (T)(sq / (double)R);  // biased, matching the running-update convention
        save_mean[(std::size_t)c] = mean;
        save_inv_std[(std::size_t)c] = T(1) / std::sqrt(var + eps);
        running_mean[(std::size_t)c] = momentum * running_mean[(std::size_t)c] + (T(1) - momentum) * mean;
        running_var[(std::size_t)c] = momentum * running_var[(std::size_t)c] + (T(1) - momentum) * var;
    }

    T* yd = y.data();
    T* hd = xhat.data();
#pragma omp parallel for schedule(static)
    for (i64 slot = 0; slot < R * C; ++slot) {
        const i64 c = slot % C;
        const T h = (xd[slot] - save_mean[(std::size_t)c]) * save_inv_std[(std::size_t)c];
        hd[slot] = h;
        yd[slot] = gamma[(std::size_t)c] * h + beta[(std::size_t)c];
    }
}

template <typename T>
void batchnorm_forward_infer(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                             const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                             const BasicTensor<T>& running_var, T eps, BasicTensor<T>& y) {
    require(x.rank() == 4, "batchnorm: input must be [N,H,W,C]");
    const i64 C = (i64)x.dim(3);
    const i64 total = (i64)x.size();
    y = BasicTensor<T>(x.shape());
    const T* xd = x.data();
    T* yd = y.data();

#pragma omp parallel for schedule(static)
    for (i64 slot = 0; slot < total; ++slot) {
        const std::size_t c = (std::size_t)(slot % C);
        const T inv = T(1) / std::sqrt(running_var[c] + eps);
        yd[slot] = gamma[c] * (xd[slot] - running_mean[c]) * inv + beta[c];
    }
}

template <typename T>
void batchnorm_backward(const BasicTensor<T>& dy, const BasicTensor<T>& xhat,
                        const BasicTensor<T>& gamma, const BasicTensor<T>& save_inv_std,
                        BasicTensor<T>& dx, BasicTensor<T>& dgamma, BasicTensor<T>& dbeta) {
    require(dy.same_shape(xhat), "batchnorm_backward: gradient/xhat shape mismatch");
    const i64 C = (i64)dy.dim(3);
    const i64 R = (i64)(dy.size() / (std::size_t)C);

    dx = BasicTensor<T>(dy.shape());
    dgamma = BasicTensor<T>({(std::size_t)C});
    dbeta = BasicTensor<T>({(std::size_t)C});
    const T* gd = dy.data();
    const T* hd = xhat.data();

#pragma omp parallel for schedule(static)
    for (i64 c = 0; c < C; ++c) {
        double sg = 0.0, sb = 0.0;
        for (i64 r = 0; r < R; ++r) {
            sg += (double)gd[r * C + c] * (double)hd[r * C + c];
            sb += gd[r * C + c];
        }
        dgamma[(std::size_t)c] = (T)sg;
        dbeta[(std::size_t)c] = (T)sb;
    }

    T* dxd = dx.data();
#pragma omp parallel for schedule(static)
    for (i64 slot = 0; slot < R * C; ++slot) {
        const std::size_t c = (std::size_t)(slot % C);
        const T scale = gamma[c] * save_inv_std[c] / (T)R;
        dxd[slot] = scale * ((T)R * gd[slot] - dbeta[c] - hd[slot] * dgamma[c]);
    }
}

template <typename T>
void relu_forward(const BasicTensor<T>& x, BasicTensor<T>& y) {
    const i64 total = (i64)x.size();
    y = BasicTensor<T>(x.shape());
    const T* xd = x.data();
    T* yd = y.data();
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < total; ++i) yd[i] = xd[i] > T(0) ? xd[i] : T(0);
}

template <typename T>
void relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy, BasicTensor<T>& dx) {
    require(x.same_shape(dy), "relu_backward: shape mismatch");
    const i64 total = (i64)x.size();
    dx = BasicTensor<T>(x.shape());
    const T* xd = x.data();
    const T* gd = dy.data();
    T* dxd = dx.data();
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < total; ++i) dxd[i] = xd[i] > T(0) ? gd[i] : T(0);
}

template <typename T>
void softmax_forward(const BasicTensor<T>& x, BasicTensor<T>& y) {
    require(x.rank() == 2, "softmax_forward: expects [N,K]");
    const i64 N = (i64)x.dim(0), K = (i64)x.dim(1);
    y = BasicTensor<T>(x.shape());
    const T* xd = x.data();
    T* yd = y.data();
#pragma omp parallel for schedule(static)
    for (i64 n = 0; n < N; ++n) {
        const T* row = xd + n * K;
        T* out = yd + n * K;
        T mx = row[0];
        for (i64 k = 1; k < K; ++k) mx = std::max(mx, row[k]);
        double sum = 0.0;
        for (i64 k = 0; k < K; ++k) {
            out[k] = std::exp(row[k] - mx);
            sum += out[k];
        }
        for (i64 k = 0; k < K; ++k) out[k] = (T)((double)out[k] / sum);
    }
}

template <typename T>
void softmax_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy, BasicTensor<T>& dx) {
    require(y.same_shape(dy), "softmax_backward: shape mismatch");
    const i64 N = (i64)y.dim(0), K = (i64)y.dim(1);
    dx = BasicTensor<T>(y.shape());
    const T* pd = y.data();
    const T* gd = dy.data();
    T* dxd = dx.data();
#pragma omp parallel for schedule(static)
    for (i64 n = 0; n < N; ++n) {
        const T* p = pd + n * K;
        const T* g = gd + n * K;
        T dot = T(0);
        for (i64 k = 0; k < K; ++k) dot += g[k] * p[k];
        for (i64 k = 0; k < K; ++k) dxd[n * K + k] = p[k] * (g[k] - dot);
    }
}

template <typename T>
void mul_elementwise(const BasicTensor<T>& x, const BasicTensor<T>& mask, BasicTensor<T>& y) {
    require(x.same_shape(mask), "mul_elementwise: shape mismatch");
    const i64 total = (i64)x.size();
    y = BasicTensor<T>(x.shape());
    const T* xd = x.data();
    const T* md = mask.data();
    T* yd = y.data();
#pragma omp parallel for schedule(static)
    for (i64 i = 0; i < total; ++i) yd[i] = xd[i] * md[i];
}

#define RFMTL_INSTANTIATE_KERNELS(T)                                                              \
    template void conv2d_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                 \
                                    const BasicTensor<T>&, std::size_t, std::size_t,              \
                                    BasicTensor<T>&);                                             \
    template void conv2d_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                \
                                     const BasicTensor<T>&, std::size_t, std::size_t,             \
                                     BasicTensor<T>&, BasicTensor<T>&, BasicTensor<T>&);          \
    template void maxpool_forward<T>(const BasicTensor<T>&, std::size_t, std::size_t,             \
                                     BasicTensor<T>&, BasicTensor<std::size_t>&);                 \
    template void maxpool_backward<T>(const BasicTensor<T>&, const BasicTensor<std::size_t>&,     \
                                      BasicTensor<T>&);                                           \
    template void dense_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                   const BasicTensor<T>&, BasicTensor<T>&);                       \
    template void dense_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                 \
                                    const BasicTensor<T>&, BasicTensor<T>&, BasicTensor<T>&,      \
                                    BasicTensor<T>&);                                             \
    template void batchnorm_forward_train<T>(const BasicTensor<T>&, const BasicTensor<T>&,        \
                                             const BasicTensor<T>&, T, T, BasicTensor<T>&,        \
                                             BasicTensor<T>&, BasicTensor<T>&, BasicTensor<T>&,   \
                                             BasicTensor<T>&, BasicTensor<T>&);                   \
    template void batchnorm_forward_infer<T>(const BasicTensor<T>&, const BasicTensor<T>&,        \
                                             const BasicTensor<T>&, const BasicTensor<T>&,        \
                                             const BasicTensor<T>&, T, BasicTensor<T>&);          \
    template void batchnorm_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                        const BasicTensor<T>&, const BasicTensor<T>&,             \
                                        BasicTensor<T>&, BasicTensor<T>&, BasicTensor<T>&);       \
    template void relu_forward<T>(const BasicTensor<T>&, BasicTensor<T>&);                        \
    template void relu_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                   BasicTensor<T>&);                                              \
    template void softmax_forward<T>(const BasicTensor<T>&, BasicTensor<T>&);                     \
    template void softmax_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,               \
                                      BasicTensor<T>&);                                           \
    template void mul_elementwise<T>(const BasicTensor<T>&, const BasicTensor<T>&,                \
                                     BasicTensor<T>&);

RFMTL_INSTANTIATE_KERNELS(float)
RFMTL_INSTANTIATE_KERNELS(double)

#undef RFMTL_INSTANTIATE_KERNELS

}  // namespace rfmtl::kern
