#include "rfmtl/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rfmtl/errors.hpp"
#include "rfmtl/loss.hpp"
#include "rfmtl/adam.hpp"

namespace rfmtl {

namespace {

constexpr std::size_t kEvalChunk = 256;
constexpr std::size_t kRowFloats = 256;  // 16*16*1 per frame

void copy_row(const Tensor& src, std::size_t row, Tensor& dst, std::size_t dst_row) {
    const float* s = src.data() + row * kRowFloats;
    float* d = dst.data() + dst_row * kRowFloats;
    for (std::size_t i = 0; i < kRowFloats; ++i) d[i] = s[i];
}

}  // namespace

TensorDataset select_rows(const TensorDataset& ds, const std::vector<std::size_t>& idx) {
    TensorDataset out;
    out.x = Tensor({idx.size(), 16, 16, 1});
    out.mod.reserve(idx.size());
    out.sig.reserve(idx.size());
    if (!ds.snr_db.empty()) out.snr_db.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        copy_row(ds.x, idx[i], out.x, i);
        out.mod.push_back(ds.mod[idx[i]]);
        out.sig.push_back(ds.sig[idx[i]]);
        if (!ds.snr_db.empty()) out.snr_db.push_back(ds.snr_db[idx[i]]);
    }
    return out;
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("train config: max_epochs must be >= 1");
    if (patience < 1 || patience >= max_epochs)
        throw ConfigError("train config: need 1 <= patience < max_epochs");
    if (batch_size < 2) throw ConfigError("train config: batch size must be >= 2 for batch norm");
    if (!(lr > 0.0f)) throw ConfigError("train config: learning rate must be positive");
}

SplitEval evaluate_split(const ModelGraph& model, const TensorDataset& ds, const LossWeights& w,
                         std::size_t* clamp_count) {
    if (ds.size() == 0) throw ConfigError("cannot evaluate an empty split");
    const std::size_t n = ds.size();
    Tensor mod_probs({n, model.mod_branch.back().out_shape()[0]});
    Tensor sig_probs({n, model.sig_branch.back().out_shape()[0]});
    for (std::size_t start = 0; start < n; start += kEvalChunk) {
        const std::size_t count = std::min(kEvalChunk, n - start);
        Tensor chunk({count, 16, 16, 1});
        for (std::size_t i = 0; i < count; ++i) copy_row(ds.x, start + i, chunk, i);
        const ForwardResult r = model.forward_infer(chunk);
        const std::size_t km = r.mod_probs.dim(1), ks = r.sig_probs.dim(1);
        for (std::size_t i = 0; i < count; ++i) {
            for (std::size_t k = 0; k < km; ++k)
                mod_probs[(start + i) * km + k] = r.mod_probs[i * km + k];
            for (std::size_t k = 0; k < ks; ++k)
                sig_probs[(start + i) * ks + k] = r.sig_probs[i * ks + k];
        }
    }
    SplitEval ev;
    ev.loss = joint_loss(mod_probs, sig_probs, ds.mod, ds.sig, w, clamp_count);
    ev.mod_acc = accuracy(mod_probs, ds.mod);
    ev.sig_acc = accuracy(sig_probs, ds.sig);
    return ev;
}

TrainResult train(ModelGraph graph, const TensorDataset& train_set, const TensorDataset& val_set,
                  const TrainConfig& tc, const LossWeights& w) {
    tc.validate();
    w.validate();
    if (train_set.size() == 0 || val_set.size() == 0)
        throw ConfigError("training requires non-empty train and validation splits");

    Rng rng(derive_seed(tc.seed, 0x7472));
    TrainResult res;
    res.model = graph;  // fallback snapshot if the very first epoch diverges
    const AdamConfig adam{tc.lr, 0.9f, 0.999f, 1e-8f};
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), (std::size_t)0);
    int wait = 0;

    for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        // Fisher-Yates shuffle from the run's RNG stream.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.uniform_below(i);
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum = 0.0;
        std::size_t seen = 0;
        bool bad = false;
        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            const std::size_t count = std::min(tc.batch_size, order.size() - start);
            if (count < 2) break;  // a lone trailing sample cannot batch-normalize
            Tensor bx({count, 16, 16, 1});
            std::vector<int> bmod(count), bsig(count);
            for (std::size_t i = 0; i < count; ++i) {
                copy_row(train_set.x, order[start + i], bx, i);
                bmod[i] = train_set.mod[order[start + i]];
                bsig[i] = train_set.sig[order[start + i]];
            }
            const ForwardResult fr = graph.forward_train(bx, rng);
            const JointLoss jl =
                joint_loss(fr.mod_probs, fr.sig_probs, bmod, bsig, w, &res.clamp_warnings);
            if (!std::isfinite(jl.mtl)) {
                bad = true;
                break;
            }
            loss_sum += jl.mtl * (double)count;
            seen += count;
            auto [dmod, dsig] = joint_loss_grad(fr.mod_probs, fr.sig_probs, bmod, bsig, w);
            graph.backward(dmod, dsig);
            adam_step_all(graph.params(), adam);
        }
        if (bad) {
            res.diverged = true;
            break;
        }

        EpochStats st;
        st.epoch = epoch;
        st.train_loss = seen ? loss_sum / (double)seen : 0.0;
        const SplitEval ev = evaluate_split(graph, val_set, w, &res.clamp_warnings);
        st.val_loss = ev.loss.mtl;
        st.mod_acc = ev.mod_acc;
        st.sig_acc = ev.sig_acc;
        res.history.push_back(st);

        if (!std::isfinite(st.val_loss)) {
            res.diverged = true;
            break;
        }
        if (st.val_loss < res.best_val_loss) {
            res.best_val_loss = st.val_loss;
            res.best_epoch = epoch;
            res.model = graph;
            wait = 0;
        } else if (++wait >= tc.patience) {
            break;
        }
    }
    return res;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open history file for writing: " + path);
    os << "epoch,train_loss,val_loss,mod_acc,sig_acc\n";
    char buf[160];
    for (const EpochStats& st : history) {
        std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", st.epoch, st.train_loss,
                      st.val_loss, st.mod_acc, st.sig_acc);
        os << buf;
    }
}

std::vector<SweepRow> task_weight_sweep(const MtlConfig& cfg, const TensorDataset& train_set,
                                        const TensorDataset& val_set,
                                        const TensorDataset& eval_set, const TrainConfig& tc,
                                        const std::vector<float>& w_m_grid) {
    std::vector<SweepRow> rows;
    rows.reserve(w_m_grid.size());
    for (float wm : w_m_grid) {
        LossWeights w{wm, 1.0f - wm};
        ModelGraph g = build_model(cfg, tc.seed);
        TrainResult r = train(std::move(g), train_set, val_set, tc, w);
        const SplitEval ev = evaluate_split(r.model, eval_set, w);
        rows.push_back({wm, 1.0f - wm, ev.mod_acc, ev.sig_acc});
    }
    return rows;
}

}  // namespace rfmtl
