#pragma once

#include <cstddef>

#include "rfmtl/tensor.hpp"

// Serial brute-force counterparts of the kernels in kernels.hpp. These are
// deliberately written as direct summations with no shared helpers or OpenMP,
// so they can serve as independent oracles in tests and as the single-thread
// baseline in the kernel benchmark. Keep them slow and obvious.

namespace rfmtl::ref {

template <typename T>
void conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                    std::size_t stride, std::size_t pad, BasicTensor<T>& y);

template <typename T>
void maxpool_forward(const BasicTensor<T>& x, std::size_t pool, std::size_t stride,
                     BasicTensor<T>& y);

template <typename T>
void dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                   BasicTensor<T>& y);

}  // namespace rfmtl::ref
