#pragma once

#include <cstddef>

#include "rfmtl/tensor.hpp"

// OpenMP-parallel NN kernels. Layout conventions used throughout:
//   activations  [N, H, W, C]   (row-major, channel fastest)
//   conv weights [kh, kw, Ci, Co]
//   dense weights [In, Out]
//
// Every kernel parallelizes over independent output slots only; each slot's
// inner summation runs in a fixed program order, so results are bit-identical
// across thread counts.

namespace rfmtl::kern {

// Reads RFMTL_THREADS and caps the OpenMP thread pool if it is set.
void apply_thread_cap_from_env();
int effective_threads();

template <typename T>
void conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                    std::size_t stride, std::size_t pad, BasicTensor<T>& y);

template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                     std::size_t stride, std::size_t pad, BasicTensor<T>& dx, BasicTensor<T>& dw,
                     BasicTensor<T>& db);

// argmax holds, per output element, the flat index into x of the chosen
// maximum (first maximum in row-major window order on ties).
template <typename T>
void maxpool_forward(const BasicTensor<T>& x, std::size_t pool, std::size_t stride,
                     BasicTensor<T>& y, BasicTensor<std::size_t>& argmax);

template <typename T>
void maxpool_backward(const BasicTensor<T>& dy, const BasicTensor<std::size_t>& argmax,
                      BasicTensor<T>& dx);

template <typename T>
void dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                   BasicTensor<T>& y);

template <typename T>
void dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& dy,
                    BasicTensor<T>& dx, BasicTensor<T>& dw, BasicTensor<T>& db);

// Per-channel batch norm over [N,H,W,C] (channel = last axis). Train mode
// normalizes by biased batch moments and folds them into the running moments
// with the given momentum; save_mean/save_inv_std/xhat are cached for backward.
template <typename T>
void batchnorm_forward_train(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                             const BasicTensor<T>& beta, T eps, T momentum,
                             BasicTensor<T>& running_mean, BasicTensor<T>& running_var,
                             BasicTensor<T>& y, BasicTensor<T>& save_mean,
                             BasicTensor<T>& save_inv_std, BasicTensor<T>& xhat);

template <typename T>
void batchnorm_forward_infer(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                             const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                             const BasicTensor<T>& running_var, T eps, BasicTensor<T>& y);

template <typename T>
void batchnorm_backward(const BasicTensor<T>& dy, const BasicTensor<T>& xhat,
                        const BasicTensor<T>& gamma, const BasicTensor<T>& save_inv_std,
                        BasicTensor<T>& dx, BasicTensor<T>& dgamma, BasicTensor<T>& dbeta);

template <typename T>
void relu_forward(const BasicTensor<T>& x, BasicTensor<T>& y);

template <typename T>
void relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy, BasicTensor<T>& dx);

// Row-wise softmax over [N,K], shifted by the row max before exponentiation.
template <typename T>
void softmax_forward(const BasicTensor<T>& x, BasicTensor<T>& y);

// General Jacobian-vector product given the softmax output y:
// dx_k = y_k (dy_k - sum_j dy_j y_j), per row.
template <typename T>
void softmax_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy, BasicTensor<T>& dx);

// Elementwise x * mask, used by dropout (mask entries are 0 or 1/(1-rate)).
template <typename T>
void mul_elementwise(const BasicTensor<T>& x, const BasicTensor<T>& mask, BasicTensor<T>& y);

}  // namespace rfmtl::kern
