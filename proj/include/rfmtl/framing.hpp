#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "rfmtl/tensor.hpp"

namespace rfmtl {

using ComplexSample = std::complex<float>;
using ComplexSeries = std::vector<ComplexSample>;  // arbitrary-length sample run
using ComplexFrame = std::vector<ComplexSample>;   // always kFrameLen samples

inline constexpr std::size_t kFrameLen = 128;
inline constexpr std::size_t kFrameSide = 16;  // 256 reals reshaped to 16x16

double frame_energy(const ComplexFrame& frame);

// Scales the frame so its total energy (sum of |x|^2) is exactly 1. Throws
// NumericInputError on an all-zero frame.
void normalize_unit_energy(ComplexFrame& frame);

// Stacks [I(0..127); Q(0..127)] into 256 reals and reshapes row-major to
// 16x16x1. Throws NumericInputError unless the frame has kFrameLen samples.
Tensor frame_to_tensor(const ComplexFrame& frame);  // [1,16,16,1]

Tensor frames_to_batch(const std::vector<ComplexFrame>& frames);  // [N,16,16,1]

// Slices a series into non-overlapping 128-sample frames, scaling each to
// unit energy. All-zero frames are dropped (and counted in *dropped when
// provided) rather than normalized.
std::vector<ComplexFrame> frame_and_normalize(const ComplexSeries& signal,
                                              std::size_t* dropped = nullptr);

}  // namespace rfmtl
