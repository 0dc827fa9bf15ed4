#pragma once

// Reporting: per-SNR accuracy curves, confusion matrices, latency
// measurement, and the compute/memory comparison table across models.

#include <string>
#include <vector>

#include "rfmtl/counters.hpp"
#include "rfmtl/graph.hpp"
#include "rfmtl/train.hpp"

namespace rfmtl {

enum class Task { Modulation, SignalClass };

struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::size_t> counts;  // K*K row-major, rows = truth

    std::size_t k() const { return class_names.size(); }
    std::size_t& at(std::size_t truth, std::size_t pred) { return counts[truth * k() + pred]; }
    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * k() + pred]; }
    std::size_t total() const;
    std::size_t row_sum(std::size_t truth) const;
    double top1_accuracy() const;  // trace / total
    // Rows scaled to sum to 1; all-zero rows stay zero.
    std::vector<double> normalized() const;
    void write_csv(const std::string& path) const;
};

struct SnrAccuracy {
    double snr_db = 0.0;
    double mod_acc = 0.0;
    double sig_acc = 0.0;
    std::size_t count = 0;
};

// Top-1 accuracy per task per SNR cell present in the dataset, ascending
// SNR. Cells with no examples simply do not appear.
std::vector<SnrAccuracy> accuracy_by_snr(const ModelGraph& model, const TensorDataset& ds);

void write_snr_accuracy_csv(const std::string& path, const std::vector<SnrAccuracy>& rows);

// Confusion over the rows of `ds` at one SNR cell (exact match in centi-dB).
ConfusionMatrix confusion(const ModelGraph& model, const TensorDataset& ds, Task task,
                          double snr_db);

struct LatencyStats {
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
    std::size_t frames = 0;
    std::size_t repetitions = 0;
    std::string environment;  // compiler + thread fingerprint
};

// Single-frame forward passes on one thread, timed after a 100-frame
// warm-up; statistics pool all frames across repetitions.
LatencyStats benchmark_latency(const ModelGraph& model, std::size_t n_frames,
                               std::size_t repetitions);

struct ModelReport {
    std::string name;
    GraphCost cost;              // layer-walk MAC counts
    ParamCount params;           // biasless and total views
    std::size_t weight_payload_bytes = 0;
    LatencyStats latency;
    std::vector<SnrAccuracy> accuracy;  // empty when no dataset was given
    // Percent reductions relative to the declared baseline row.
    double flops_reduction_pct = 0.0;
    double params_reduction_pct = 0.0;
};

struct NamedModel {
    std::string name;
    const ModelGraph* graph = nullptr;
};

// One report per model; reductions are computed against models[baseline].
// When `ds` is non-null its rows feed each model's accuracy table.
std::vector<ModelReport> compare_models(const std::vector<NamedModel>& models,
                                        std::size_t baseline, const TensorDataset* ds,
                                        std::size_t latency_frames = 50,
                                        std::size_t latency_reps = 3);

std::string model_reports_json(const std::vector<ModelReport>& reports);

// Rank correlation with average ranks on ties; returns 1.0 when either
// input has zero rank variance.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace rfmtl
