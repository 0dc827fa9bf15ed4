#include "rfmtl/framing.hpp"

#include <cmath>

#include "rfmtl/errors.hpp"

namespace rfmtl {

double frame_energy(const ComplexFrame& frame) {
    double e = 0.0;
    for (const ComplexSample& s : frame) e += (double)s.real() * s.real() + (double)s.imag() * s.imag();
    return e;
}

void normalize_unit_energy(ComplexFrame& frame) {
    const double e = frame_energy(frame);
    if (e <= 0.0) throw NumericInputError("cannot energy-normalize an all-zero frame");
    const float scale = (float)(1.0 / std::sqrt(e));
    for (ComplexSample& s : frame) s *= scale;
}

Tensor frame_to_tensor(const ComplexFrame& frame) {
    if (frame.size() != kFrameLen)
        throw NumericInputError("frame must hold exactly 128 complex samples");
    Tensor t({1, kFrameSide, kFrameSide, 1});
    for (std::size_t i = 0; i < kFrameLen; ++i) {
        t[i] = frame[i].real();
        t[kFrameLen + i] = frame[i].imag();
    }
    return t;
}

std::vector<ComplexFrame> frame_and_normalize(const ComplexSeries& signal, std::size_t* dropped) {
    if (signal.size() < kFrameLen)
        throw NumericInputError("need at least 128 samples to cut a frame");
    std::vector<ComplexFrame> frames;
    frames.reserve(signal.size() / kFrameLen);
    for (std::size_t start = 0; start + kFrameLen <= signal.size(); start += kFrameLen) {
        ComplexFrame f(signal.begin() + (std::ptrdiff_t)start,
                       signal.begin() + (std::ptrdiff_t)(start + kFrameLen));
        if (frame_energy(f) <= 0.0) {
            if (dropped) ++*dropped;
            continue;
        }
        normalize_unit_energy(f);
        frames.push_back(std::move(f));
    }
    return frames;
}

Tensor frames_to_batch(const std::vector<ComplexFrame>& frames) {
    Tensor t({frames.size(), kFrameSide, kFrameSide, 1});
    for (std::size_t n = 0; n < frames.size(); ++n) {
        const ComplexFrame& f = frames[n];
        if (f.size() != kFrameLen)
            throw NumericInputError("frame must hold exactly 128 complex samples");
        for (std::size_t i = 0; i < kFrameLen; ++i) {
            t[n * 2 * kFrameLen + i] = f[i].real();
            t[n * 2 * kFrameLen + kFrameLen + i] = f[i].imag();
        }
    }
    return t;
}

}  // namespace rfmtl
