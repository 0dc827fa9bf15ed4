// Channel impairments against closed-form and statistical oracles, and the
// dataset builder's split, labeling, and determinism contracts.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "rfmtl/channel.hpp"
#include "rfmtl/dataset.hpp"
#include "rfmtl/errors.hpp"
#include "rfmtl/framing.hpp"
#include "rfmtl/rng.hpp"
#include "rfmtl/waveform.hpp"

using namespace rfmtl;
namespace fs = std::filesystem;

namespace {

ComplexSeries unit_tone(std::size_t n, double cycles_per_sample, std::uint64_t seed) {
    Rng rng(seed);
    const double phi0 = rng.uniform(0.0, 2.0 * M_PI);
    ComplexSeries x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ph = phi0 + 2.0 * M_PI * cycles_per_sample * (double)i;
        x[i] = ComplexSample((float)std::cos(ph), (float)std::sin(ph));
    }
    return x;
}

double series_energy(const ComplexSeries& x, std::size_t lo, std::size_t hi) {
    double e = 0.0;
    for (std::size_t i = lo; i < hi; ++i) e += std::norm((std::complex<double>)x[i]);
    return e;
}

std::string temp_path(const char* name) {
    return (fs::temp_directory_path() / name).string();
}

std::string file_bytes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE_BEGIN("channel_dataset");

TEST_CASE("AWGN hits the requested SNR within 0.3 dB over 10000 frames") {
    const double target_db = 5.0;
    double sig_e = 0.0, noise_e = 0.0;
    for (std::uint64_t f = 0; f < 10000; ++f) {
        const ComplexSeries x = unit_tone(kFrameLen, 0.11, 1000 + f);
        const ComplexSeries y = apply_awgn(x, target_db, 5000 + f);
        sig_e += series_energy(x, 0, x.size());
        ComplexSeries noise(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) noise[i] = y[i] - x[i];
        noise_e += series_energy(noise, 0, noise.size());
    }
    const double measured_db = 10.0 * std::log10(sig_e / noise_e);
    CHECK(std::fabs(measured_db - target_db) <= 0.3);
}

TEST_CASE("AWGN scales a trailing partial window by its own energy and length") {
    const double target_db = 10.0;
    double sig_e = 0.0, noise_e = 0.0;
    for (std::uint64_t f = 0; f < 3000; ++f) {
        const ComplexSeries x = unit_tone(kFrameLen + 64, 0.07, 2000 + f);
        const ComplexSeries y = apply_awgn(x, target_db, 7000 + f);
        sig_e += series_energy(x, kFrameLen, x.size());
        for (std::size_t i = kFrameLen; i < x.size(); ++i)
            noise_e += std::norm((std::complex<double>)y[i] - (std::complex<double>)x[i]);
    }
    const double measured_db = 10.0 * std::log10(sig_e / noise_e);
    CHECK(std::fabs(measured_db - target_db) <= 0.3);
}

TEST_CASE("AWGN passes zero-energy windows through untouched") {
    ComplexSeries x(2 * kFrameLen, ComplexSample{0.f, 0.f});
    for (std::size_t i = 0; i < kFrameLen; ++i) x[i] = ComplexSample{1.f, 0.f};
    const ComplexSeries y = apply_awgn(x, 0.0, 42);
    for (std::size_t i = kFrameLen; i < y.size(); ++i) {
        CHECK(y[i].real() == 0.f);
        CHECK(y[i].imag() == 0.f);
    }
    // The live window did get noise.
    CHECK(series_energy(y, 0, kFrameLen) != doctest::Approx(kFrameLen).epsilon(1e-12));
}

TEST_CASE("all-off dynamic channel is the identity to 1e-9") {
    ChannelConfig cfg;  // all stddevs zero, fading off, no noise
    cfg.validate();
    const ComplexSeries x = unit_tone(300, 0.043, 11);
    const ComplexSeries y = apply_dynamic_channel(x, cfg, 99);
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::abs((std::complex<double>)y[i] - (std::complex<double>)x[i]) <= 1e-9);
}

TEST_CASE("constant CFO matches the closed-form rotation") {
    ChannelConfig cfg;
    cfg.cfo_initial_hz = 250.0;
    cfg.cfo_max_hz = 250.0;
    cfg.cfo_stddev_hz = 0.0;  // walk frozen at the initial offset
    const double fs = cfg.sample_rate;
    const ComplexSeries x = unit_tone(256, 0.031, 21);
    const ComplexSeries y = apply_dynamic_channel(x, cfg, 5);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::complex<double> want =
            (std::complex<double>)x[i] *
            std::polar(1.0, 2.0 * M_PI * 250.0 * (double)i / fs);
        CHECK(std::abs((std::complex<double>)y[i] - want) <= 1e-5);
    }
}

TEST_CASE("zero-Doppler single-tap fading is one constant complex gain") {
    ChannelConfig cfg;
    cfg.fading_enabled = true;
    cfg.max_doppler_hz = 0.0;  // freezes every sinusoid
    cfg.rician_k = 3.0;
    cfg.pdp_delays_samples = {0.0};
    cfg.pdp_magnitudes = {1.0};
    const ComplexSeries x = unit_tone(256, 0.057, 31);
    const ComplexSeries y = apply_dynamic_channel(x, cfg, 77);
    const std::complex<double> g0 = (std::complex<double>)y[0] / (std::complex<double>)x[0];
    CHECK(std::abs(g0) > 0.1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::complex<double> g = (std::complex<double>)y[i] / (std::complex<double>)x[i];
        CHECK(std::abs(g - g0) <= 1e-4);
    }
}

TEST_CASE("canonical dynamic channel is finite, deterministic, and not a no-op") {
    const ChannelConfig cfg = ChannelConfig::dynamic_canonical(std::nullopt);
    cfg.validate();
    const ComplexSeries x = unit_tone(384, 0.083, 41);
    const ComplexSeries a = apply_dynamic_channel(x, cfg, 123);
    const ComplexSeries b = apply_dynamic_channel(x, cfg, 123);
    const ComplexSeries c = apply_dynamic_channel(x, cfg, 124);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a != x);
    for (const ComplexSample& s : a) {
        CHECK(std::isfinite(s.real()));
        CHECK(std::isfinite(s.imag()));
    }
}

TEST_CASE("channel config validation") {
    ChannelConfig cfg;
    cfg.cfo_initial_hz = 10.0;
    cfg.cfo_max_hz = 5.0;  // initial beyond the cap
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    ChannelConfig pdp;
    pdp.fading_enabled = true;
    pdp.pdp_delays_samples = {0.0, 1.0};
    pdp.pdp_magnitudes = {1.0};  // length mismatch
    CHECK_THROWS_AS(pdp.validate(), ConfigError);
}

TEST_CASE("AWGN dataset: grid size, per-cell splits, labels, and unit energy") {
    GenConfig cfg;
    cfg.mode = ImpairmentMode::Awgn;
    cfg.snr_grid_db = {0.0, 10.0};
    cfg.per_cell = 10;
    cfg.seed = 3;
    const DatasetContainer ds = build_dataset(cfg);

    const std::size_t cells = class_table().size() * cfg.snr_grid_db.size();
    REQUIRE(ds.size() == cells * cfg.per_cell);
    CHECK(ds.train_ids.size() == cells * 7);
    CHECK(ds.val_ids.size() == cells * 2);
    CHECK(ds.test_ids.size() == cells * 1);

    std::set<std::pair<int, int>> allowed;
    for (const ClassPair& p : class_table())
        allowed.insert({(int)p.mod, (int)p.sig});

    std::uint32_t prev_id = 0;
    bool first = true;
    for (const LabeledExample& ex : ds.examples) {
        if (!first) CHECK(ex.id > prev_id);
        prev_id = ex.id;
        first = false;
        CHECK(allowed.count({(int)ex.mod_label, (int)ex.sig_label}) == 1);
        CHECK((ex.snr_db() == 0.0 || ex.snr_db() == 10.0));
        REQUIRE(ex.iq.size() == kFrameLen);
        CHECK(frame_energy(ex.iq) == doctest::Approx(1.0).epsilon(1e-4));
    }

    // Split ids partition the id space.
    std::set<std::uint32_t> seen;
    for (const auto* ids : {&ds.train_ids, &ds.val_ids, &ds.test_ids}) {
        CHECK(std::is_sorted(ids->begin(), ids->end()));
        for (std::uint32_t id : *ids) CHECK(seen.insert(id).second);
    }
    CHECK(seen.size() == ds.size());
}

TEST_CASE("dataset generation is deterministic and the container round-trips") {
    GenConfig cfg;
    cfg.snr_grid_db = {6.0};
    cfg.per_cell = 10;
    cfg.seed = 17;
    const DatasetContainer a = build_dataset(cfg);
    const DatasetContainer b = build_dataset(cfg);

    const std::string pa = temp_path("rfmtl_ds_a.bin");
    const std::string pb = temp_path("rfmtl_ds_b.bin");
    const std::string pc = temp_path("rfmtl_ds_c.bin");
    save_dataset(a, pa);
    save_dataset(b, pb);
    CHECK(file_bytes(pa) == file_bytes(pb));

    const DatasetContainer loaded = load_dataset(pa);
    save_dataset(loaded, pc);
    CHECK(file_bytes(pa) == file_bytes(pc));

    fs::remove(pa);
    fs::remove(pb);
    fs::remove(pc);
}

TEST_CASE("dynamic-mode dataset still tags exact per-frame SNR") {
    GenConfig cfg;
    cfg.mode = ImpairmentMode::Dynamic;
    cfg.snr_grid_db = {10.0};
    cfg.per_cell = 10;
    cfg.seed = 23;
    const DatasetContainer ds = build_dataset(cfg);
    REQUIRE(ds.size() == class_table().size() * 10);
    for (const LabeledExample& ex : ds.examples) {
        CHECK(ex.snr_centi_db == 1000);
        CHECK(frame_energy(ex.iq) == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("cells smaller than 10 frames cannot honor the split and are refused") {
    GenConfig cfg;
    cfg.per_cell = 9;
    CHECK_THROWS_AS(cfg.validate(), SplitInfeasibleError);
    CHECK_THROWS_AS(build_dataset(cfg), SplitInfeasibleError);
}

TEST_CASE("stored frames carry the tagged SNR inside the occupied band") {
    // The tag means in-band signal energy over in-band noise energy. Estimate
    // both spectrally: average the periodogram of many frames from one BPSK
    // cell, read the noise floor off the empty part of the band, and compare
    // the ratio inside the occupied band against the tag.
    const double tag_db = 3.0;
    GenConfig cfg;
    cfg.mode = ImpairmentMode::Awgn;
    cfg.waveforms = {default_spec(Modulation::BPSK, SignalClass::Satcom)};
    cfg.snr_grid_db = {tag_db};
    cfg.per_cell = 4000;
    cfg.seed = 31;
    const DatasetContainer ds = build_dataset(cfg);
    REQUIRE(ds.size() == 4000);

    const std::size_t n = kFrameLen;
    std::vector<double> pavg(n, 0.0);
    std::vector<std::complex<double>> tw(n);
    for (std::size_t k = 0; k < n; ++k)
        tw[k] = std::exp(std::complex<double>(0.0, -2.0 * M_PI * (double)k / (double)n));
    for (const LabeledExample& ex : ds.examples) {
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc(0.0, 0.0);
            std::complex<double> w(1.0, 0.0);
            const std::complex<double> step = tw[k];
            for (std::size_t i = 0; i < n; ++i) {
                acc += (std::complex<double>)ex.iq[i] * w;
                w *= step;
            }
            pavg[k] += std::norm(acc);
        }
    }

    // Signed bin frequencies in Hz; the BPSK cell sits at +10 kHz with a
    // root-raised-cosine band 10.8 kHz to each side.
    const double bin_hz = cfg.waveforms[0].sample_rate / (double)n;  // 1 kHz
    const double center_hz = cfg.waveforms[0].carrier_offset;
    const double half_hz = 0.675 * cfg.waveforms[0].symbol_rate;
    auto freq_of = [&](std::size_t k) {
        return (k < n / 2 ? (double)k : (double)k - (double)n) * bin_hz;
    };

    // Sanity: the strongest bin lies inside the nominal band.
    std::size_t peak = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (pavg[k] > pavg[peak]) peak = k;
    REQUIRE(std::fabs(freq_of(peak) - center_hz) <= half_hz);

    double floor_sum = 0.0, band_sum = 0.0;
    std::size_t floor_bins = 0, band_bins = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = std::fabs(freq_of(k) - center_hz);
        if (d <= half_hz) {
            band_sum += pavg[k];
            ++band_bins;
        } else if (d > 1.6 * half_hz) {
            floor_sum += pavg[k];
            ++floor_bins;
        }
    }
    REQUIRE(band_bins > 0);
    REQUIRE(floor_bins > 0);
    const double noise_per_bin = floor_sum / (double)floor_bins;
    const double in_band_noise = noise_per_bin * (double)band_bins;
    const double in_band_signal = band_sum - in_band_noise;
    REQUIRE(in_band_signal > 0.0);
    const double measured_db = 10.0 * std::log10(in_band_signal / in_band_noise);
    CHECK(std::fabs(measured_db - tag_db) <= 0.4);
}

TEST_CASE("tensor conversion and SNR filtering slice the right rows") {
    GenConfig cfg;
    cfg.snr_grid_db = {-2.0, 10.0};
    cfg.per_cell = 10;
    cfg.seed = 29;
    const DatasetContainer ds = build_dataset(cfg);

    const TensorDataset test_set = to_tensor_dataset(ds, Split::Test);
    REQUIRE(test_set.size() == ds.test_ids.size());
    REQUIRE(test_set.x.shape() ==
            std::vector<std::size_t>{test_set.size(), 16, 16, 1});

    // Row content matches the container example it came from.
    const LabeledExample& ex0 = ds.by_id(ds.test_ids[0]);
    const Tensor t0 = frame_to_tensor(ex0.iq);
    for (std::size_t i = 0; i < 256; ++i) CHECK(test_set.x[i] == t0[i]);
    CHECK(test_set.mod[0] == (int)ex0.mod_label);
    CHECK(test_set.sig[0] == (int)ex0.sig_label);

    const TensorDataset low = filter_by_snr(test_set, -2.0);
    REQUIRE(low.size() == test_set.size() / 2);
    for (double s : low.snr_db) CHECK(s == -2.0);
}

TEST_CASE("loader rejects wrong magic and truncated files") {
    const std::string p = temp_path("rfmtl_ds_bad.bin");
    {
        std::ofstream os(p, std::ios::binary);
        os << "NOTTHEMAGICBYTES____________";
    }
    CHECK_THROWS_AS(load_dataset(p), FormatError);

    GenConfig cfg;
    cfg.snr_grid_db = {0.0};
    cfg.per_cell = 10;
    const DatasetContainer ds = build_dataset(cfg);
    save_dataset(ds, p);
    const std::string whole = file_bytes(p);
    {
        std::ofstream os(p, std::ios::binary);
        os.write(whole.data(), (std::streamsize)(whole.size() / 2));
    }
    CHECK_THROWS_AS(load_dataset(p), FormatError);
    fs::remove(p);
}

TEST_SUITE_END();
