#include "rfmtl/kernels_ref.hpp"

#include <algorithm>
#include <cstdint>

#include "rfmtl/errors.hpp"

namespace rfmtl::ref {

namespace {
using i64 = std::int64_t;
}

// Direct sum in the 1-based index form out(m_p, n_q) = sum over p, q, r of
// K(p, q, r) * F(m, n, r) with m = m_p + p - 1 (generalized here with stride
// and padding; contributions falling outside F are zero).
template <typename T>
void conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                    std::size_t stride, std::size_t pad, BasicTensor<T>& y) {
    if (x.rank() != 4 || w.rank() != 4) throw DimensionError("ref conv: bad rank");
    const i64 N = (i64)x.dim(0), H = (i64)x.dim(1), W = (i64)x.dim(2), Ci = (i64)x.dim(3);
    const i64 kh = (i64)w.dim(0), kw = (i64)w.dim(1), Co = (i64)w.dim(3);
    if ((i64)w.dim(2) != Ci) throw DimensionError("ref conv: depth mismatch");
    const i64 s = (i64)stride, padd = (i64)pad;
    const i64 Ho = (H + 2 * padd - kh) / s + 1;
    const i64 Wo = (W + 2 * padd - kw) / s + 1;

    y = BasicTensor<T>({(std::size_t)N, (std::size_t)Ho, (std::size_t)Wo, (std::size_t)Co});
    for (i64 b = 0; b < N; ++b)
        for (i64 mp = 1; mp <= Ho; ++mp)
            for (i64 nq = 1; nq <= Wo; ++nq)
                for (i64 n = 1; n <= Co; ++n) {
                    // Accumulates in double like the parallel kernels, so the
                    // two paths stay bit-identical.
                    double acc = bias.empty() ? 0.0 : (double)bias[(std::size_t)(n - 1)];
                    for (i64 p = 1; p <= kh; ++p)
                        for (i64 q = 1; q <= kw; ++q)
                            for (i64 r = 1; r <= Ci; ++r) {
                                const i64 m = (mp - 1) * s + p - padd;   // 1-based input row
                                const i64 nn = (nq - 1) * s + q - padd;  // 1-based input col
                                if (m < 1 || m > H || nn < 1 || nn > W) continue;
                                const T k = w[(std::size_t)((((p - 1) * kw + (q - 1)) * Ci +
                                                             (r - 1)) * Co + (n - 1))];
                                const T f = x[(std::size_t)((((b * H + (m - 1)) * W + (nn - 1)) *
                                                             Ci) + (r - 1))];
                                acc += (double)k * (double)f;
                            }
                    y[(std::size_t)((((b * Ho + (mp - 1)) * Wo + (nq - 1)) * Co) + (n - 1))] =
                        (T)acc;
                }
}

template <typename T>
void maxpool_forward(const BasicTensor<T>& x, std::size_t pool, std::size_t stride,
                     BasicTensor<T>& y) {
    if (x.rank() != 4) throw DimensionError("ref pool: bad rank");
    const i64 N = (i64)x.dim(0), H = (i64)x.dim(1), W = (i64)x.dim(2), C = (i64)x.dim(3);
    const i64 k = (i64)pool, s = (i64)stride;
    const i64 Ho = (H - k) / s + 1;
    const i64 Wo = (W - k) / s + 1;

    y = BasicTensor<T>({(std::size_t)N, (std::size_t)Ho, (std::size_t)Wo, (std::size_t)C});
    for (i64 n = 0; n < N; ++n)
        for (i64 oh = 0; oh < Ho; ++oh)
            for (i64 ow = 0; ow < Wo; ++ow)
                for (i64 c = 0; c < C; ++c) {
                    T best = x[(std::size_t)(((n * H + oh * s) * W + ow * s) * C + c)];
                    for (i64 p = 0; p < k; ++p)
                        for (i64 q = 0; q < k; ++q)
                            best = std::max(
                                best,
                                x[(std::size_t)(((n * H + oh * s + p) * W + ow * s + q) * C + c)]);
                    y[(std::size_t)(((n * Ho + oh) * Wo + ow) * C + c)] = best;
                }
}

template <typename T>
void dense_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& bias,
                   BasicTensor<T>& y) {
    if (x.rank() != 2 || w.rank() != 2) throw DimensionError("ref dense: bad rank");
    const i64 N = (i64)x.dim(0), In = (i64)x.dim(1), Out = (i64)w.dim(1);

    y = BasicTensor<T>({(std::size_t)N, (std::size_t)Out});
    for (i64 n = 0; n < N; ++n)
        for (i64 o = 0; o < Out; ++o) {
            double acc = bias.empty() ? 0.0 : (double)bias[(std::size_t)o];
            for (i64 i = 0; i < In; ++i)
                acc += (double)x[(std::size_t)(n * In + i)] * (double)w[(std::size_t)(i * Out + o)];
            y[(std::size_t)(n * Out + o)] = (T)acc;
        }
}

#define RFMTL_INSTANTIATE_REF(T)                                                                  \
    template void conv2d_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                 \
                                    const BasicTensor<T>&, std::size_t, std::size_t,              \
                                    BasicTensor<T>&);                                             \
    template void maxpool_forward<T>(const BasicTensor<T>&, std::size_t, std::size_t,             \
                                     BasicTensor<T>&);                                            \
    template void dense_forward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                   const BasicTensor<T>&, BasicTensor<T>&);

RFMTL_INSTANTIATE_REF(float)
RFMTL_INSTANTIATE_REF(double)

#undef RFMTL_INSTANTIATE_REF

}  // namespace rfmtl::ref
