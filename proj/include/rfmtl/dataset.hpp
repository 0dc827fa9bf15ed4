#pragma once

// Labeled IQ dataset generation, the on-disk container, and conversion to
// the tensor form the trainer consumes. A dataset is a grid of cells, one
// per (waveform pair, SNR), each holding `per_cell` normalized 128-sample
// frames with per-cell 70/20/10 train/val/test splits.

#include <cstdint>
#include <string>
#include <vector>

#include "rfmtl/channel.hpp"
#include "rfmtl/framing.hpp"
#include "rfmtl/train.hpp"
#include "rfmtl/waveform.hpp"

namespace rfmtl {

enum class ImpairmentMode { Awgn, Dynamic };

const char* impairment_mode_name(ImpairmentMode m);

struct GenConfig {
    ImpairmentMode mode = ImpairmentMode::Awgn;
    std::vector<double> snr_grid_db = {0.0};
    std::size_t per_cell = 100;
    std::uint64_t seed = 1;
    // Waveforms to include; empty means all synthesizable pairs with their
    // default specs.
    std::vector<WaveformSpec> waveforms;
    // Template for dynamic mode (sample_rate and awgn_snr_db are filled in
    // per cell); ignored in AWGN mode.
    ChannelConfig dynamic_channel = ChannelConfig::dynamic_canonical(std::nullopt);

    void validate() const;
    std::vector<WaveformSpec> resolved_waveforms() const;
};

struct LabeledExample {
    std::uint32_t id = 0;
    std::uint8_t mod_label = 0;
    std::uint8_t sig_label = 0;
    std::int16_t snr_centi_db = 0;
    ComplexFrame iq;  // kFrameLen unit-energy samples

    double snr_db() const { return (double)snr_centi_db / 100.0; }
};

struct DatasetContainer {
    // Serialized generation manifest (mode, seed, grid, class tables, per-
    // waveform parameters). Stored verbatim so a save after load is
    // byte-identical.
    std::string header_json;
    std::vector<LabeledExample> examples;  // ascending id
    std::vector<std::uint32_t> train_ids, val_ids, test_ids;  // each sorted

    std::size_t size() const { return examples.size(); }
    const LabeledExample& by_id(std::uint32_t id) const;
};

// Deterministic generation: example k of cell (pair p, SNR index s) is
// built from sub-seed derive(seed, p, s, k), so any subset of cells can be
// regenerated independently with identical bytes.
DatasetContainer build_dataset(const GenConfig& cfg);

void save_dataset(const DatasetContainer& ds, const std::string& path);
DatasetContainer load_dataset(const std::string& path);

enum class Split { Train, Val, Test };

TensorDataset to_tensor_dataset(const DatasetContainer& ds, Split split);

// Rows of `ds` whose SNR matches `snr_db` (within a centi-dB).
TensorDataset filter_by_snr(const TensorDataset& ds, double snr_db);

}  // namespace rfmtl
