#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rfmtl/mtl.hpp"

namespace rfmtl {

// Frames already shaped for the network, with integer labels per task.
// snr_db is carried along (one entry per row) so results can be sliced by
// signal strength; it may be left empty when irrelevant.
struct TensorDataset {
    Tensor x;  // [N,16,16,1]
    std::vector<int> mod;
    std::vector<int> sig;
    std::vector<double> snr_db;

    std::size_t size() const { return mod.size(); }
};

// Rows of `ds` selected by `idx`, in order.
TensorDataset select_rows(const TensorDataset& ds, const std::vector<std::size_t>& idx);

struct TrainConfig {
    int max_epochs = 30;
    int patience = 5;
    float lr = 0.001f;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;

    void validate() const;  // patience < max_epochs, batch_size >= 2
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double mod_acc = 0.0;  // validation accuracy
    double sig_acc = 0.0;
};

struct TrainResult {
    ModelGraph model;  // parameters of the best-validation epoch
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_loss = std::numeric_limits<double>::infinity();
    bool diverged = false;
    std::size_t clamp_warnings = 0;  // log-floor events in loss evaluation
};

struct SplitEval {
    JointLoss loss;
    double mod_acc = 0.0;
    double sig_acc = 0.0;
};

// Inference-mode loss/accuracy over a whole split, processed in fixed-size
// chunks (results are independent of the chunk size).
SplitEval evaluate_split(const ModelGraph& model, const TensorDataset& ds, const LossWeights& w,
                         std::size_t* clamp_count = nullptr);

// Mini-batch Adam training with per-epoch validation, early stopping (stop
// after `patience` epochs without a new best validation loss), and
// best-snapshot return. A non-finite loss aborts the run and returns the
// best snapshot seen so far with diverged = true.
TrainResult train(ModelGraph graph, const TensorDataset& train_set, const TensorDataset& val_set,
                  const TrainConfig& tc, const LossWeights& w);

// epoch,train_loss,val_loss,mod_acc,sig_acc
void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

struct SweepRow {
    float w_m = 0.0f;
    float w_s = 0.0f;
    double mod_acc = 0.0;
    double sig_acc = 0.0;
};

// Trains one model per weight pair (all from the same seed) and reports
// both-task accuracy on eval_set; callers slice eval_set to a target SNR
// beforehand when they want accuracy at one signal strength.
std::vector<SweepRow> task_weight_sweep(const MtlConfig& cfg, const TensorDataset& train_set,
                                        const TensorDataset& val_set,
                                        const TensorDataset& eval_set, const TrainConfig& tc,
                                        const std::vector<float>& w_m_grid);

}  // namespace rfmtl
