// Benchmarks the OpenMP kernels against their serial reference
// implementations on the layer shapes the classifier actually runs, and
// checks that both produce bit-identical outputs while timing them.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "rfmtl/kernels.hpp"
#include "rfmtl/kernels_ref.hpp"
#include "rfmtl/rng.hpp"
#include "rfmtl/tensor.hpp"

using namespace rfmtl;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up: touch pages, spin up the thread pool
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

bool bit_identical(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

void report(const std::string& name, double ref_ms, double omp_ms, bool identical) {
    std::printf("%-24s %10.3f %10.3f %8.2fx   %s\n", name.c_str(), ref_ms, omp_ms,
                ref_ms / omp_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    kern::apply_thread_cap_from_env();
    std::size_t batch = 64;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--batch" && i + 1 < argc)
            batch = std::stoul(argv[++i]);
        else if (a == "--reps" && i + 1 < argc)
            reps = std::stoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: kernel-bench [--batch N] [--reps N]\n");
            return 2;
        }
    }

    Rng rng(0x6b62656e);
    std::printf("threads: %d, batch: %zu, reps: %d (best-of)\n", kern::effective_threads(),
                batch, reps);
    std::printf("%-24s %10s %10s %9s\n", "kernel", "serial_ms", "omp_ms", "speedup");

    bool all_ok = true;

    {  // trunk conv: 16x16x1 -> 14x14x8
        Tensor x({batch, 16, 16, 1}), w({3, 3, 1, 8}), b({8});
        x.fill_uniform(rng, -1.f, 1.f);
        w.fill_uniform(rng, -0.5f, 0.5f);
        b.fill_uniform(rng, -0.1f, 0.1f);
        Tensor yr({batch, 14, 14, 8}), yk({batch, 14, 14, 8});
        const double tr = time_ms([&] { ref::conv2d_forward(x, w, b, 1, 0, yr); }, reps);
        const double tk = time_ms([&] { kern::conv2d_forward(x, w, b, 1, 0, yk); }, reps);
        const bool ok = bit_identical(yr, yk);
        all_ok = all_ok && ok;
        report("conv2d 16x16x1->8", tr, tk, ok);
    }
    {  // branch conv: 13x13x8 -> 11x11x4
        Tensor x({batch, 13, 13, 8}), w({3, 3, 8, 4}), b({4});
        x.fill_uniform(rng, -1.f, 1.f);
        w.fill_uniform(rng, -0.5f, 0.5f);
        b.fill_uniform(rng, -0.1f, 0.1f);
        Tensor yr({batch, 11, 11, 4}), yk({batch, 11, 11, 4});
        const double tr = time_ms([&] { ref::conv2d_forward(x, w, b, 1, 0, yr); }, reps);
        const double tk = time_ms([&] { kern::conv2d_forward(x, w, b, 1, 0, yk); }, reps);
        const bool ok = bit_identical(yr, yk);
        all_ok = all_ok && ok;
        report("conv2d 13x13x8->4", tr, tk, ok);
    }
    {  // pool: 14x14x8, 2x2 stride 1
        Tensor x({batch, 14, 14, 8});
        x.fill_uniform(rng, -1.f, 1.f);
        Tensor yr({batch, 13, 13, 8}), yk({batch, 13, 13, 8});
        BasicTensor<std::size_t> arg({batch, 13, 13, 8});
        const double tr = time_ms([&] { ref::maxpool_forward(x, 2, 1, yr); }, reps);
        const double tk = time_ms([&] { kern::maxpool_forward(x, 2, 1, yk, arg); }, reps);
        const bool ok = bit_identical(yr, yk);
        all_ok = all_ok && ok;
        report("maxpool2x2 14x14x8", tr, tk, ok);
    }
    {  // branch dense: 484 -> 256
        Tensor x({batch, 484}), w({484, 256}), b({256});
        x.fill_uniform(rng, -1.f, 1.f);
        w.fill_uniform(rng, -0.1f, 0.1f);
        b.fill_uniform(rng, -0.1f, 0.1f);
        Tensor yr({batch, 256}), yk({batch, 256});
        const double tr = time_ms([&] { ref::dense_forward(x, w, b, yr); }, reps);
        const double tk = time_ms([&] { kern::dense_forward(x, w, b, yk); }, reps);
        const bool ok = bit_identical(yr, yk);
        all_ok = all_ok && ok;
        report("dense 484->256", tr, tk, ok);
    }
    {  // wider dense for a compute-bound data point: 1024 -> 1024
        Tensor x({batch, 1024}), w({1024, 1024}), b({1024});
        x.fill_uniform(rng, -1.f, 1.f);
        w.fill_uniform(rng, -0.05f, 0.05f);
        b.fill_uniform(rng, -0.1f, 0.1f);
        Tensor yr({batch, 1024}), yk({batch, 1024});
        const double tr = time_ms([&] { ref::dense_forward(x, w, b, yr); }, reps);
        const double tk = time_ms([&] { kern::dense_forward(x, w, b, yk); }, reps);
        const bool ok = bit_identical(yr, yk);
        all_ok = all_ok && ok;
        report("dense 1024->1024", tr, tk, ok);
    }

    if (!all_ok) {
        std::fprintf(stderr, "kernel outputs diverged from the serial reference\n");
        return 1;
    }
    return 0;
}
