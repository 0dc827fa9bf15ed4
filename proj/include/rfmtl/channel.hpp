#pragma once

// Propagation impairments applied to complex baseband series: sample-rate
// offset, carrier-frequency offset, selective Rician fading built from a
// sum of sinusoids, and additive white Gaussian noise scaled per frame.

#include <cstdint>
#include <optional>
#include <vector>

#include "rfmtl/framing.hpp"

namespace rfmtl {

struct ChannelConfig {
    double sample_rate = 128000.0;

    // Gaussian random walks, one step per sample, clipped to the max by
    // reflection. Initial values default to zero (walk starts centered).
    double cfo_stddev_hz = 0.0;
    double cfo_max_hz = 0.0;
    double cfo_initial_hz = 0.0;
    double sro_stddev_hz = 0.0;
    double sro_max_hz = 0.0;
    double sro_initial_hz = 0.0;

    // Sum-of-sinusoids Rician fading over a fractional-delay power profile.
    bool fading_enabled = false;
    std::size_t fading_num_sinusoids = 5;
    double max_doppler_hz = 2.0;
    double rician_k = 3.0;
    std::vector<double> pdp_delays_samples = {0.2, 0.3, 0.1};
    std::vector<double> pdp_magnitudes = {1.0, 0.5, 0.5};
    std::size_t interp_taps = 8;  // windowed-sinc length for fractional delays

    // When set, white noise is added last, scaled per 128-sample window so
    // that window energy / expected noise energy matches this SNR.
    std::optional<double> awgn_snr_db;

    void validate() const;

    // Additive noise only; everything else is identity.
    static ChannelConfig awgn_only(double snr_db);

    // The full impairment stack with the default dynamic parameters:
    // cfo walk 0.05 Hz/step capped at 250 Hz, sro walk 0.05 Hz/step capped
    // at 60 Hz, 5-sinusoid Rician fading (K = 3, 2 Hz Doppler) over the
    // [0.2, 0.3, 0.1]-sample / [1.0, 0.5, 0.5] power-delay profile.
    static ChannelConfig dynamic_canonical(std::optional<double> snr_db);
};

// Adds white Gaussian noise scaled per 128-sample window of the input; a
// trailing partial window is scaled by its own length. Zero-energy windows
// are passed through untouched.
ComplexSeries apply_awgn(const ComplexSeries& x, double snr_db, std::uint64_t seed);

// Applies SRO resampling, then CFO rotation, then fading, then AWGN, each
// stage drawing from an independent substream of `seed`. Stages whose
// parameters are zero/disabled reduce to exact identity.
ComplexSeries apply_dynamic_channel(const ComplexSeries& x, const ChannelConfig& cfg,
                                    std::uint64_t seed);

}  // namespace rfmtl
