#include "rfmtl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rfmtl/errors.hpp"
#include "rfmtl/io_util.hpp"
#include "rfmtl/rng.hpp"

namespace rfmtl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[] = "RFMTL1";
constexpr std::uint16_t kVersion = 1;

ordered_json waveform_json(const WaveformSpec& w) {
    ordered_json j;
    j["modulation"] = modulation_name(w.modulation);
    j["signal_class"] = signal_class_name(w.signal_class);
    j["symbol_rate"] = w.symbol_rate;
    j["sample_rate"] = w.sample_rate;
    j["carrier_offset"] = w.carrier_offset;
    j["pulse_shape"] = w.pulse_shape == PulseShape::RootRaisedCosine ? "rrc" : "rect";
    if (w.pulse_params) {
        ordered_json p;
        p["pulse_width_s"] = w.pulse_params->pulse_width_s;
        p["pri_s"] = w.pulse_params->pri_s;
        p["chirp_bandwidth_hz"] = w.pulse_params->chirp_bandwidth_hz;
        p["sweep_s"] = w.pulse_params->sweep_s;
        j["pulse_params"] = p;
    }
    return j;
}

ordered_json channel_json(const ChannelConfig& c) {
    ordered_json j;
    j["cfo_stddev_hz"] = c.cfo_stddev_hz;
    j["cfo_max_hz"] = c.cfo_max_hz;
    j["sro_stddev_hz"] = c.sro_stddev_hz;
    j["sro_max_hz"] = c.sro_max_hz;
    j["fading_num_sinusoids"] = c.fading_num_sinusoids;
    j["max_doppler_hz"] = c.max_doppler_hz;
    j["rician_k"] = c.rician_k;
    j["pdp_delays_samples"] = c.pdp_delays_samples;
    j["pdp_magnitudes"] = c.pdp_magnitudes;
    j["interp_taps"] = c.interp_taps;
    return j;
}

std::string build_header_json(const GenConfig& cfg, const std::vector<WaveformSpec>& wfs) {
    ordered_json j;
    j["format"] = kMagic;
    j["mode"] = impairment_mode_name(cfg.mode);
    j["seed"] = cfg.seed;
    j["per_cell"] = cfg.per_cell;
    j["snr_grid_db"] = cfg.snr_grid_db;
    j["frame_len"] = kFrameLen;
    std::vector<std::string> mods, sigs;
    for (std::size_t i = 0; i < kNumModulations; ++i) mods.push_back(modulation_name((Modulation)i));
    for (std::size_t i = 0; i < kNumSignalClasses; ++i)
        sigs.push_back(signal_class_name((SignalClass)i));
    j["modulation_classes"] = mods;
    j["signal_classes"] = sigs;
    ordered_json wjs = ordered_json::array();
    for (const WaveformSpec& w : wfs) wjs.push_back(waveform_json(w));
    j["waveforms"] = wjs;
    if (cfg.mode == ImpairmentMode::Dynamic) j["channel"] = channel_json(cfg.dynamic_channel);
    ordered_json splits;
    splits["train"] = 0.7;
    splits["val"] = 0.2;
    splits["test"] = 0.1;
    j["splits"] = splits;
    return j.dump();
}

// One normalized frame for cell (waveform, SNR) and slot k.
ComplexFrame make_example(const WaveformSpec& wf, ImpairmentMode mode,
                          const ChannelConfig& dyn_template, double snr_db,
                          std::uint64_t example_seed) {
    for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
        const std::uint64_t s = attempt == 0 ? example_seed : derive_seed(example_seed, 100 + attempt);
        ComplexFrame frame;
        if (mode == ImpairmentMode::Awgn) {
            const ComplexSeries clean = gen_baseband(wf, kFrameLen, derive_seed(s, 1));
            auto frames = frame_and_normalize(clean);
            if (frames.empty()) continue;
            frame = frames[0];
        } else {
            // Generate extra context so edge effects from resampling and
            // fractional-delay taps stay outside the kept slice.
            const std::size_t pad = 32;
            const ComplexSeries clean = gen_baseband(wf, kFrameLen + 2 * pad, derive_seed(s, 1));
            ChannelConfig ch = dyn_template;
            ch.sample_rate = wf.sample_rate;
            ch.awgn_snr_db.reset();  // noise is added after slicing, below
            const ComplexSeries shaped = apply_dynamic_channel(clean, ch, derive_seed(s, 2));
            ComplexSeries sliced(shaped.begin() + pad, shaped.begin() + pad + kFrameLen);
            auto frames = frame_and_normalize(sliced);
            if (frames.empty()) continue;
            frame = frames[0];
        }
        // The cell tag is the in-band ratio, while apply_awgn spreads white
        // noise over the whole Nyquist band; lower its whole-band parameter
        // by the occupied fraction so the in-band ratio comes out at the tag.
        const double whole_band_db = snr_db + 10.0 * std::log10(wf.noise_bandwidth_fraction());
        ComplexFrame noisy = apply_awgn(frame, whole_band_db, derive_seed(s, 3));
        if (frame_energy(noisy) == 0.0) continue;
        normalize_unit_energy(noisy);
        return noisy;
    }
    throw StateError("dataset generation: could not produce a usable frame after 16 attempts");
}

}  // namespace

const char* impairment_mode_name(ImpairmentMode m) {
    return m == ImpairmentMode::Awgn ? "awgn" : "dynamic";
}

void GenConfig::validate() const {
    if (per_cell < 10)
        throw SplitInfeasibleError("per_cell must be at least 10 to fill a 70/20/10 split");
    if (snr_grid_db.empty()) throw ConfigError("dataset: SNR grid must be non-empty");
    for (double s : snr_grid_db) {
        if (!std::isfinite(s)) throw ConfigError("dataset: SNR values must be finite");
        if (std::fabs(s) > 300.0) throw ConfigError("dataset: SNR out of supported range");
    }
    for (const WaveformSpec& w : waveforms) w.validate();
    if (mode == ImpairmentMode::Dynamic) {
        ChannelConfig c = dynamic_channel;
        c.awgn_snr_db.reset();
        c.validate();
    }
}

std::vector<WaveformSpec> GenConfig::resolved_waveforms() const {
    if (!waveforms.empty()) return waveforms;
    std::vector<WaveformSpec> out;
    for (const ClassPair& p : synthesizable_pairs()) out.push_back(default_spec(p.mod, p.sig));
    return out;
}

const LabeledExample& DatasetContainer::by_id(std::uint32_t id) const {
    const auto it = std::lower_bound(
        examples.begin(), examples.end(), id,
        [](const LabeledExample& e, std::uint32_t v) { return e.id < v; });
    if (it == examples.end() || it->id != id)
        throw FormatError("dataset: no example with id " + std::to_string(id));
    return *it;
}

DatasetContainer build_dataset(const GenConfig& cfg) {
    cfg.validate();
    const std::vector<WaveformSpec> wfs = cfg.resolved_waveforms();
    if (wfs.empty()) throw ConfigError("dataset: no waveforms to generate");

    const std::size_t n_pairs = wfs.size();
    const std::size_t n_snr = cfg.snr_grid_db.size();
    const std::size_t n_cells = n_pairs * n_snr;
    const std::size_t total = n_cells * cfg.per_cell;

    DatasetContainer ds;
    ds.header_json = build_header_json(cfg, wfs);
    ds.examples.resize(total);

    // Cells are independent: each example's stream is derived from its own
    // (pair, snr, slot) sub-seed, so parallel order cannot affect content.
#pragma omp parallel for schedule(dynamic)
    for (std::size_t c = 0; c < n_cells; ++c) {
        const std::size_t p = c / n_snr;
        const std::size_t si = c % n_snr;
        const WaveformSpec& wf = wfs[p];
        const double snr = cfg.snr_grid_db[si];
        for (std::size_t k = 0; k < cfg.per_cell; ++k) {
            LabeledExample& e = ds.examples[c * cfg.per_cell + k];
            e.id = (std::uint32_t)(c * cfg.per_cell + k);
            e.mod_label = (std::uint8_t)wf.modulation;
            e.sig_label = (std::uint8_t)wf.signal_class;
            e.snr_centi_db = (std::int16_t)std::llround(snr * 100.0);
            e.iq = make_example(wf, cfg.mode, cfg.dynamic_channel, snr,
                                derive_seed(cfg.seed, p, si, k));
        }
    }

    // 70/20/10 split inside every cell, assigned by slot order.
    const std::size_t n = cfg.per_cell;
    const std::size_t n_tr = (std::size_t)std::floor(0.7 * (double)n + 0.5);
    std::size_t n_val = (std::size_t)std::floor(0.2 * (double)n + 0.5);
    if (n_tr + n_val >= n) n_val = n - n_tr - 1;
    for (std::size_t c = 0; c < n_cells; ++c) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint32_t id = (std::uint32_t)(c * n + k);
            if (k < n_tr)
                ds.train_ids.push_back(id);
            else if (k < n_tr + n_val)
                ds.val_ids.push_back(id);
            else
                ds.test_ids.push_back(id);
        }
    }
    std::sort(ds.train_ids.begin(), ds.train_ids.end());
    std::sort(ds.val_ids.begin(), ds.val_ids.end());
    std::sort(ds.test_ids.begin(), ds.test_ids.end());
    return ds;
}

void save_dataset(const DatasetContainer& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    io::write_bytes(os, kMagic, sizeof(kMagic) - 1);
    io::write_le<std::uint16_t>(os, kVersion);
    io::write_string(os, ds.header_json);
    for (const auto* ids : {&ds.train_ids, &ds.val_ids, &ds.test_ids}) {
        io::write_le<std::uint32_t>(os, (std::uint32_t)ids->size());
        for (std::uint32_t id : *ids) io::write_le<std::uint32_t>(os, id);
    }
    io::write_le<std::uint32_t>(os, (std::uint32_t)ds.examples.size());
    for (const LabeledExample& e : ds.examples) {
        if (e.iq.size() != kFrameLen)
            throw FormatError("dataset: example frame is not " + std::to_string(kFrameLen) +
                              " samples");
        io::write_le<std::uint32_t>(os, e.id);
        io::write_le<std::uint8_t>(os, e.mod_label);
        io::write_le<std::uint8_t>(os, e.sig_label);
        io::write_le<std::int16_t>(os, e.snr_centi_db);
        for (const ComplexSample& s : e.iq) io::write_f32_le(os, s.real());
        for (const ComplexSample& s : e.iq) io::write_f32_le(os, s.imag());
    }
    if (!os) throw FormatError("write failed: " + path);
}

DatasetContainer load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    io::expect_magic(is, kMagic);
    const auto version = io::read_le<std::uint16_t>(is);
    if (version != kVersion)
        throw FormatError("dataset: unsupported version " + std::to_string(version));
    DatasetContainer ds;
    ds.header_json = io::read_string(is);
    for (auto* ids : {&ds.train_ids, &ds.val_ids, &ds.test_ids}) {
        const auto n = io::read_le<std::uint32_t>(is);
        ids->resize(n);
        for (auto& id : *ids) id = io::read_le<std::uint32_t>(is);
        if (!std::is_sorted(ids->begin(), ids->end()))
            throw FormatError("dataset: split id list is not sorted");
    }
    const auto n_examples = io::read_le<std::uint32_t>(is);
    ds.examples.resize(n_examples);
    std::uint32_t prev_id = 0;
    for (std::size_t i = 0; i < n_examples; ++i) {
        LabeledExample& e = ds.examples[i];
        e.id = io::read_le<std::uint32_t>(is);
        if (i > 0 && e.id <= prev_id) throw FormatError("dataset: example ids not ascending");
        prev_id = e.id;
        e.mod_label = io::read_le<std::uint8_t>(is);
        e.sig_label = io::read_le<std::uint8_t>(is);
        if (e.mod_label >= kNumModulations || e.sig_label >= kNumSignalClasses)
            throw ClassTableError("dataset: label outside the class tables");
        e.snr_centi_db = io::read_le<std::int16_t>(is);
        e.iq.resize(kFrameLen);
        for (std::size_t j = 0; j < kFrameLen; ++j) {
            float re = io::read_f32_le(is);
            e.iq[j] = ComplexSample(re, e.iq[j].imag());
        }
        for (std::size_t j = 0; j < kFrameLen; ++j) {
            float im = io::read_f32_le(is);
            e.iq[j] = ComplexSample(e.iq[j].real(), im);
        }
    }
    for (const auto* ids : {&ds.train_ids, &ds.val_ids, &ds.test_ids})
        for (std::uint32_t id : *ids) (void)ds.by_id(id);  // throws on unknown id
    return ds;
}

TensorDataset to_tensor_dataset(const DatasetContainer& ds, Split split) {
    const std::vector<std::uint32_t>* ids = &ds.train_ids;
    if (split == Split::Val) ids = &ds.val_ids;
    if (split == Split::Test) ids = &ds.test_ids;
    std::vector<ComplexFrame> frames;
    TensorDataset out;
    frames.reserve(ids->size());
    for (std::uint32_t id : *ids) {
        const LabeledExample& e = ds.by_id(id);
        frames.push_back(e.iq);
        out.mod.push_back((int)e.mod_label);
        out.sig.push_back((int)e.sig_label);
        out.snr_db.push_back(e.snr_db());
    }
    out.x = frames.empty() ? Tensor({0, kFrameSide, kFrameSide, 1}) : frames_to_batch(frames);
    return out;
}

TensorDataset filter_by_snr(const TensorDataset& ds, double snr_db) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (std::fabs(ds.snr_db[i] - snr_db) < 0.005) idx.push_back(i);
    return select_rows(ds, idx);
}

}  // namespace rfmtl
