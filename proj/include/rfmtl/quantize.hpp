#pragma once

// Affine INT8 quantization of trained models: post-training calibration,
// optional quantization-aware fine-tuning with straight-through gradients,
// a dequantize-at-boundary reference inference path, and size reporting.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rfmtl/graph.hpp"
#include "rfmtl/train.hpp"

namespace rfmtl {

// Signed 8-bit code c represents the real value s * (c - z).
struct QuantizedTensor {
    std::vector<std::int8_t> q;
    double scale = 1.0;
    std::int32_t zero_point = 0;
    std::vector<std::size_t> shape;

    std::size_t size() const { return q.size(); }
};

// Substitute for a degenerate (lo == hi) range: a tiny symmetric interval
// around the single value so the scale stays positive.
std::pair<float, float> widen_range(float lo, float hi);

// q = clamp(round(x / s) + z, -128, 127) with s = (hi - lo) / 255 and
// z = clamp(round(-128 - lo / s)). Rounds half away from zero. Values
// outside [lo, hi] saturate. Degenerate or non-finite ranges are refused.
QuantizedTensor quantize_tensor(const Tensor& x, float lo, float hi);

Tensor dequantize(const QuantizedTensor& qt);

// Quantize-dequantize onto a uniform grid of `levels` steps spanning
// [lo, hi]. When `pass_mask` is given it receives 1 where x was inside the
// range (straight-through gradient passes) and 0 where it saturated.
Tensor fake_quant(const Tensor& x, float lo, float hi, double levels = 255.0,
                  Tensor* pass_mask = nullptr);

enum class CalibMode { Percentile, MinMax };
const char* calib_mode_name(CalibMode m);
CalibMode calib_mode_from_name(const std::string& name);

struct ActRange {
    float lo = 0.0f;
    float hi = 0.0f;
};
using RangeMap = std::map<std::string, ActRange>;  // "<branch>/<layer>/in|out" -> range

// Conv/dense input and output sites of the graph, e.g. "m/dense5".
std::vector<std::string> activation_sites(const ModelGraph& g);

// Runs the calibration set through the graph in inference mode recording
// every conv/dense input/output value, then cuts ranges per site:
// Percentile keeps the 0.1st to 99.9th percentile (nearest rank), MinMax
// keeps the full observed extent. Values are buffered per site, so this is
// intended for calibration sets of up to a few thousand frames.
RangeMap calibrate_activations(const ModelGraph& g, const TensorDataset& calib, CalibMode mode);

// Exposed for testing the cut-point rule against a full-sort oracle.
float percentile_nearest_rank(std::vector<float> values, double p);

struct QuantizedModel {
    // Same structure as the source; conv/dense weight values are replaced by
    // their dequantized codes so forward_infer is the reference INT8 path.
    ModelGraph graph;
    std::vector<QuantizedTensor> weights;  // graph traversal order
    std::vector<std::string> weight_names;
    RangeMap act_ranges;
    CalibMode calib_mode = CalibMode::Percentile;
};

// Per-tensor min/max weight quantization (biases and batch-norm parameters
// stay 32-bit). Requires ranges covering every conv/dense site.
QuantizedModel quantize_model(const ModelGraph& g, const RangeMap& act_ranges, CalibMode mode);

// Reference path: 32-bit arithmetic on dequantized weights. Throws a state
// error when any activation site lacks a calibrated range.
ForwardResult quantized_inference(const QuantizedModel& qm, const Tensor& x);
std::pair<std::vector<float>, std::vector<float>> quantized_inference(const QuantizedModel& qm,
                                                                      const ComplexFrame& frame);

// Fine-tunes float master weights under simulated quantization: forward
// passes snap weights (per-tensor min/max, 255 levels) and activations (at
// the frozen calibrated ranges); gradients pass straight through inside
// each range and are zeroed where the input saturated. Validation scores
// the snapped model, with the same early stopping as plain training.
TrainResult qat_finetune(const ModelGraph& g, const TensorDataset& train_set,
                         const TensorDataset& val_set, const TrainConfig& tc,
                         const LossWeights& w, const RangeMap& act_ranges);

void save_quantized(const QuantizedModel& qm, const std::string& path);
QuantizedModel load_quantized(const std::string& path);

struct SizeReport {
    // Conv/dense weight tensors only.
    std::size_t float_weight_payload_bytes = 0;
    std::size_t int8_weight_payload_bytes = 0;  // codes + per-tensor scale/zero point
    double weight_payload_ratio = 0.0;
    // Every parameter tensor (weights, biases, batch-norm, running moments).
    std::size_t float_total_payload_bytes = 0;
    std::size_t int8_total_payload_bytes = 0;
    double total_payload_ratio = 0.0;
    // On-disk checkpoint sizes, zero when no files were measured.
    std::size_t float_file_bytes = 0;
    std::size_t int8_file_bytes = 0;
    double file_ratio = 0.0;

    std::string to_json() const;
};

// Payload accounting for a model and its quantized form; when checkpoint
// paths are given, their on-disk sizes are included.
SizeReport size_report(const ModelGraph& g, const QuantizedModel& qm,
                       const std::string& float_path = "", const std::string& quant_path = "");

}  // namespace rfmtl
