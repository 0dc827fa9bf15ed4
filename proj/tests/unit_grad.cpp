// Backward passes against 64-bit central-difference oracles, plus the joint
// loss gradient's linearity in the task weights.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <vector>

#include "rfmtl/graph.hpp"
#include "rfmtl/kernels.hpp"
#include "rfmtl/layers.hpp"
#include "rfmtl/loss.hpp"
#include "rfmtl/mtl.hpp"
#include "rfmtl/rng.hpp"
#include "rfmtl/tensor.hpp"

using namespace rfmtl;
using DT = BasicTensor<double>;

namespace {

constexpr double kStep = 1e-4;
constexpr double kTol = 1e-4;

// Worst relative error between the analytic gradient of sum(dy * f(...)) with
// respect to `var` and its central difference, perturbing every coordinate.
double fd_worst(const std::function<DT()>& fwd, DT& var, const DT& dy, const DT& analytic) {
    REQUIRE(var.same_shape(analytic));
    double worst = 0.0;
    for (std::size_t i = 0; i < var.size(); ++i) {
        const double keep = var[i];
        var[i] = keep + kStep;
        const DT yp = fwd();
        var[i] = keep - kStep;
        const DT ym = fwd();
        var[i] = keep;
        REQUIRE(yp.same_shape(dy));
        double sp = 0.0, sm = 0.0;
        for (std::size_t j = 0; j < dy.size(); ++j) {
            sp += dy[j] * yp[j];
            sm += dy[j] * ym[j];
        }
        const double fd = (sp - sm) / (2.0 * kStep);
        const double g = analytic[i];
        const double denom = std::max({std::fabs(fd), std::fabs(g), 1e-6});
        worst = std::max(worst, std::fabs(g - fd) / denom);
    }
    return worst;
}

// Values with pairwise gaps far larger than the probe step, so max-pool
// winners cannot flip between f(x-h) and f(x+h).
DT well_separated(const std::vector<std::size_t>& shape, Rng& rng) {
    DT t(shape);
    std::vector<double> grid(t.size());
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = -1.0 + 0.01 * (double)i;
    for (std::size_t i = grid.size(); i > 1; --i)
        std::swap(grid[i - 1], grid[rng.uniform_below(i)]);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = grid[i];
    return t;
}

DT uniform(const std::vector<std::size_t>& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    DT t(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.same_shape(b));
    float m = 0.f;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_SUITE_BEGIN("grad");

TEST_CASE("conv2d backward matches central differences on 20 random instances") {
    Rng rng(201);
    for (int it = 0; it < 20; ++it) {
        const std::size_t k = 1 + rng.uniform_below(3);
        const std::size_t stride = 1 + rng.uniform_below(2);
        const std::size_t pad = rng.uniform_below(2);
        const std::size_t N = 1 + rng.uniform_below(2);
        const std::size_t H = k + rng.uniform_below(4);
        const std::size_t W = k + rng.uniform_below(4);
        const std::size_t Ci = 1 + rng.uniform_below(3);
        const std::size_t Co = 1 + rng.uniform_below(3);
        DT x = uniform({N, H, W, Ci}, rng);
        DT w = uniform({k, k, Ci, Co}, rng);
        DT b = uniform({Co}, rng);
        const auto fwd = [&] {
            DT y;
            kern::conv2d_forward(x, w, b, stride, pad, y);
            return y;
        };
        const DT y0 = fwd();
        DT dy = uniform(y0.shape(), rng);
        DT dx, dw, db;
        kern::conv2d_backward(x, w, dy, stride, pad, dx, dw, db);
        CHECK(fd_worst(fwd, x, dy, dx) < kTol);
        CHECK(fd_worst(fwd, w, dy, dw) < kTol);
        CHECK(fd_worst(fwd, b, dy, db) < kTol);
    }
}

TEST_CASE("dense backward matches central differences on 20 random instances") {
    Rng rng(202);
    for (int it = 0; it < 20; ++it) {
        const std::size_t N = 1 + rng.uniform_below(4);
        const std::size_t In = 1 + rng.uniform_below(10);
        const std::size_t Out = 1 + rng.uniform_below(8);
        DT x = uniform({N, In}, rng);
        DT w = uniform({In, Out}, rng);
        DT b = uniform({Out}, rng);
        const auto fwd = [&] {
            DT y;
            kern::dense_forward(x, w, b, y);
            return y;
        };
        DT dy = uniform({N, Out}, rng);
        DT dx, dw, db;
        kern::dense_backward(x, w, dy, dx, dw, db);
        CHECK(fd_worst(fwd, x, dy, dx) < kTol);
        CHECK(fd_worst(fwd, w, dy, dw) < kTol);
        CHECK(fd_worst(fwd, b, dy, db) < kTol);
    }
}

TEST_CASE("maxpool backward matches central differences on 20 random instances") {
    Rng rng(203);
    for (int it = 0; it < 20; ++it) {
        const std::size_t pool = 1 + rng.uniform_below(3);
        const std::size_t stride = 1 + rng.uniform_below(2);
        const std::size_t N = 1 + rng.uniform_below(2);
        const std::size_t H = pool + rng.uniform_below(4);
        const std::size_t W = pool + rng.uniform_below(4);
        const std::size_t C = 1 + rng.uniform_below(3);
        DT x = well_separated({N, H, W, C}, rng);
        const auto fwd = [&] {
            DT y;
            BasicTensor<std::size_t> am;
            kern::maxpool_forward(x, pool, stride, y, am);
            return y;
        };
        DT y0;
        BasicTensor<std::size_t> argmax;
        kern::maxpool_forward(x, pool, stride, y0, argmax);
        DT dy = uniform(y0.shape(), rng);
        DT dx(x.shape());
        kern::maxpool_backward(dy, argmax, dx);
        CHECK(fd_worst(fwd, x, dy, dx) < kTol);
    }
}

TEST_CASE("batchnorm backward matches central differences on 20 random instances") {
    Rng rng(204);
    for (int it = 0; it < 20; ++it) {
        const std::size_t N = 2 + rng.uniform_below(4);
        const std::size_t H = 1 + rng.uniform_below(3);
        const std::size_t W = 1 + rng.uniform_below(3);
        const std::size_t C = 1 + rng.uniform_below(3);
        DT x = uniform({N, H, W, C}, rng, -2.0, 2.0);
        DT gamma = uniform({C}, rng, 0.5, 1.5);
        DT beta = uniform({C}, rng, -0.5, 0.5);
        const double eps = 1e-5;
        const auto fwd = [&] {
            DT rm({C}), rv({C}), y, sm, si, xh;
            rv.fill(1.0);
            kern::batchnorm_forward_train(x, gamma, beta, eps, 0.99, rm, rv, y, sm, si, xh);
            return y;
        };
        const DT y0 = fwd();
        DT dy = uniform(y0.shape(), rng);

        DT rm({C}), rv({C}), y, sm, si, xh;
        rv.fill(1.0);
        kern::batchnorm_forward_train(x, gamma, beta, eps, 0.99, rm, rv, y, sm, si, xh);
        DT dx, dgamma, dbeta;
        kern::batchnorm_backward(dy, xh, gamma, si, dx, dgamma, dbeta);
        CHECK(fd_worst(fwd, x, dy, dx) < kTol);
        CHECK(fd_worst(fwd, gamma, dy, dgamma) < kTol);
        CHECK(fd_worst(fwd, beta, dy, dbeta) < kTol);
    }
}

TEST_CASE("relu backward matches central differences away from the kink") {
    Rng rng(205);
    for (int it = 0; it < 20; ++it) {
        const std::size_t N = 1 + rng.uniform_below(3);
        const std::size_t F = 1 + rng.uniform_below(12);
        DT x({N, F});
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = rng.uniform(-1.0, 1.0);
            x[i] = (u < 0 ? -1.0 : 1.0) * (0.01 + std::fabs(u));
        }
        const auto fwd = [&] {
            DT y;
            kern::relu_forward(x, y);
            return y;
        };
        DT dy = uniform({N, F}, rng);
        DT dx;
        kern::relu_backward(x, dy, dx);
        CHECK(fd_worst(fwd, x, dy, dx) < kTol);
    }
}

TEST_CASE("softmax backward matches central differences on 20 random instances") {
    Rng rng(206);
    for (int it = 0; it < 20; ++it) {
        const std::size_t N = 1 + rng.uniform_below(3);
        const std::size_t K = 2 + rng.uniform_below(9);
        DT x = uniform({N, K}, rng, -3.0, 3.0);
        const auto fwd = [&] {
            DT y;
            kern::softmax_forward(x, y);
            return y;
        };
        DT y;
        kern::softmax_forward(x, y);
        DT dy = uniform({N, K}, rng);
        DT dx;
        kern::softmax_backward(y, dy, dx);
        CHECK(fd_worst(fwd, x, dy, dx) < kTol);
    }
}

TEST_CASE("dropout layer: cached mask drives forward and backward, FD agrees") {
    Rng init(207);
    for (int it = 0; it < 20; ++it) {
        Layer layer(LayerSpec::dropout(0.4f), {10}, "drop0", "sh", init);
        Tensor x({4, 10});
        Rng data(300 + (std::uint64_t)it);
        x.fill_uniform(data, -1.f, 1.f);
        Rng fwd_rng(400 + (std::uint64_t)it);
        LayerCache cache;
        const Tensor y = layer.forward_train(x, fwd_rng, cache);
        REQUIRE(cache.mask.same_shape(x));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(y[i] == x[i] * cache.mask[i]);

        Tensor dy({4, 10});
        dy.fill_uniform(data, -1.f, 1.f);
        const Tensor dx = layer.backward(dy, cache);

        // 64-bit mirror with the frozen mask.
        DT xd(x.shape()), mask(x.shape()), dyd(x.shape()), analytic(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xd[i] = x[i];
            mask[i] = cache.mask[i];
            dyd[i] = dy[i];
            analytic[i] = dx[i];
        }
        const auto fwd = [&] {
            DT yd(xd.shape());
            for (std::size_t i = 0; i < xd.size(); ++i) yd[i] = xd[i] * mask[i];
            return yd;
        };
        CHECK(fd_worst(fwd, xd, dyd, analytic) < kTol);
    }
}

TEST_CASE("gaussian noise layer: additive in training, gradient is identity") {
    Rng init(208);
    for (int it = 0; it < 20; ++it) {
        Layer layer(LayerSpec::gaussian_noise(0.1f), {3, 3, 2}, "noise0", "sh", init);
        Tensor x({2, 3, 3, 2});
        Rng data(500 + (std::uint64_t)it);
        x.fill_uniform(data, -1.f, 1.f);
        Rng fwd_rng(600 + (std::uint64_t)it);
        LayerCache cache;
        const Tensor y = layer.forward_train(x, fwd_rng, cache);

        Tensor dy(x.shape());
        dy.fill_uniform(data, -1.f, 1.f);
        const Tensor dx = layer.backward(dy, cache);
        CHECK(std::memcmp(dx.data(), dy.data(), dy.size() * sizeof(float)) == 0);

        // 64-bit mirror: adding the recovered offset is linear with gradient 1.
        DT xd(x.shape()), off(x.shape()), dyd(x.shape()), analytic(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xd[i] = x[i];
            off[i] = (double)y[i] - (double)x[i];
            dyd[i] = dy[i];
            analytic[i] = dx[i];
        }
        const auto fwd = [&] {
            DT yd(xd.shape());
            for (std::size_t i = 0; i < xd.size(); ++i) yd[i] = xd[i] + off[i];
            return yd;
        };
        CHECK(fd_worst(fwd, xd, dyd, analytic) < kTol);

        // Inference mode is the identity.
        const Tensor yi = layer.forward_infer(x);
        CHECK(std::memcmp(yi.data(), x.data(), x.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("flatten layer: pure reshape both directions, FD agrees") {
    Rng init(209);
    for (int it = 0; it < 20; ++it) {
        Layer layer(LayerSpec::flatten(), {2, 3, 2}, "flat0", "sh", init);
        Tensor x({3, 2, 3, 2});
        Rng data(700 + (std::uint64_t)it);
        x.fill_uniform(data, -1.f, 1.f);
        Rng fwd_rng(1);
        LayerCache cache;
        const Tensor y = layer.forward_train(x, fwd_rng, cache);
        REQUIRE(y.dim(0) == 3);
        REQUIRE(y.dim(1) == 12);
        CHECK(std::memcmp(y.data(), x.data(), x.size() * sizeof(float)) == 0);

        Tensor dy(y.shape());
        dy.fill_uniform(data, -1.f, 1.f);
        const Tensor dx = layer.backward(dy, cache);
        REQUIRE(dx.same_shape(x));
        CHECK(std::memcmp(dx.data(), dy.data(), dy.size() * sizeof(float)) == 0);

        DT xd({3, 12}), dyd({3, 12}), analytic({3, 12});
        for (std::size_t i = 0; i < x.size(); ++i) {
            xd[i] = x[i];
            dyd[i] = dy[i];
            analytic[i] = dx[i];
        }
        const auto fwd = [&] { return xd; };
        CHECK(fd_worst(fwd, xd, dyd, analytic) < kTol);
    }
}

TEST_CASE("task-branch gradients scale linearly in the loss weights") {
    MtlConfig mc;
    mc.c_sh = 4;
    mc.c_m = 2;
    mc.f_m = 16;
    mc.c_s = 2;
    mc.f_s = 16;
    ModelGraph model = build_model(mc, 42);

    const std::size_t N = 6;
    Tensor x({N, 16, 16, 1});
    Rng data(210);
    x.fill_uniform(data, -1.f, 1.f);
    std::vector<int> mod_labels(N), sig_labels(N);
    for (std::size_t i = 0; i < N; ++i) {
        mod_labels[i] = (int)data.uniform_below(9);
        sig_labels[i] = (int)data.uniform_below(11);
    }

    // One forward/backward under given weights; grads snapshotted by name.
    const std::uint64_t fwd_seed = 77;
    const auto grads_under = [&](float wm, float ws) {
        Rng r(fwd_seed);
        const ForwardResult fr = model.forward_train(x, r);
        const auto [dmod, dsig] =
            joint_loss_grad(fr.mod_probs, fr.sig_probs, mod_labels, sig_labels, {wm, ws});
        model.backward(dmod, dsig);
        std::vector<Tensor> out;
        for (const Param* p : ((const ModelGraph&)model).params()) out.push_back(p->grad);
        return out;
    };

    const auto g_mod = grads_under(1.f, 0.f);   // single-task endpoints
    const auto g_sig = grads_under(0.f, 1.f);
    const auto g_mix = grads_under(0.3f, 0.7f);

    // Explicit single-task pass: mod head fed alone, sig head gradient zeroed
    // by hand rather than through the weighted loss.
    {
        Rng r(fwd_seed);
        const ForwardResult fr = model.forward_train(x, r);
        const Tensor dmod = cross_entropy_grad(fr.mod_probs, mod_labels, 1.f);
        Tensor dsig(fr.sig_probs.shape());
        model.backward(dmod, dsig);
        std::size_t i = 0;
        for (const Param* p : ((const ModelGraph&)model).params()) {
            CHECK(max_abs_diff(p->grad, g_mod[i]) <= 1e-6f);
            ++i;
        }
    }

    // Sig-branch grads vanish at w_s = 0 and vice versa.
    {
        std::size_t i = 0;
        for (const Param* p : ((const ModelGraph&)model).params()) {
            if (p->branch == "s")
                for (std::size_t j = 0; j < g_mod[i].size(); ++j) CHECK(g_mod[i][j] == 0.f);
            if (p->branch == "m")
                for (std::size_t j = 0; j < g_sig[i].size(); ++j) CHECK(g_sig[i][j] == 0.f);
            ++i;
        }
    }

    // Mixture = 0.3 * mod endpoint + 0.7 * sig endpoint, everywhere.
    {
        std::size_t i = 0;
        for (const Param* p : ((const ModelGraph&)model).params()) {
            (void)p;
            for (std::size_t j = 0; j < g_mix[i].size(); ++j) {
                const double want = 0.3 * (double)g_mod[i][j] + 0.7 * (double)g_sig[i][j];
                const double got = g_mix[i][j];
                CHECK(std::fabs(got - want) <= 1e-5 * std::max(1.0, std::fabs(want)));
            }
            ++i;
        }
    }
}

TEST_SUITE_END();
