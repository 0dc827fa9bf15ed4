#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfmtl/framing.hpp"
#include "rfmtl/rng.hpp"

namespace rfmtl {

enum class Modulation : std::uint8_t {
    BPSK,
    ASK,
    AmDsb,
    AmSsb,
    GFSK,
    DsssCck,
    DsssOqpsk,
    FMCW,
    PCW,
};
inline constexpr std::size_t kNumModulations = 9;

enum class SignalClass : std::uint8_t {
    Satcom,
    ShortRange,
    AmRadio,
    Bluetooth,
    Ieee80211bg,
    Ieee802154,
    RadarAltimeter,
    AirborneDetection,
    AirborneRange,
    GroundMapping,
    AirGroundMti,
};
inline constexpr std::size_t kNumSignalClasses = 11;

const char* modulation_name(Modulation m);
const char* signal_class_name(SignalClass s);
Modulation modulation_from_name(const std::string& name);
SignalClass signal_class_from_name(const std::string& name);

// The 12 valid (modulation, signal class) pairings. AM-DSB and AM-SSB share
// the AM Radio class; PCW fans out to the four pulsed-radar classes.
struct ClassPair {
    Modulation mod;
    SignalClass sig;
};
const std::vector<ClassPair>& class_table();
bool pair_allowed(Modulation m, SignalClass s);

// Pairs whose waveforms this toolkit synthesizes locally. The Bluetooth,
// IEEE802.11bg, and IEEE802.15.4 classes come from captured recordings in the
// original datasets; the GFSK/CCK/OQPSK generators here produce stand-in
// waveforms so those labels can still be exercised end to end.
const std::vector<ClassPair>& synthesizable_pairs();

enum class PulseShape : std::uint8_t { RootRaisedCosine, Rectangular };

struct PulseParams {
    double pulse_width_s = 0.0;      // PCW: carrier-on time
    double pri_s = 0.0;              // PCW: pulse repetition interval
    double chirp_bandwidth_hz = 0.0; // FMCW: sweep width
    double sweep_s = 0.0;            // FMCW: sweep duration
};

struct WaveformSpec {
    Modulation modulation = Modulation::BPSK;
    SignalClass signal_class = SignalClass::Satcom;
    double symbol_rate = 16000.0;   // symbols/s (chip rate for the DSSS pair)
    double sample_rate = 128000.0;  // samples/s
    double carrier_offset = 0.0;    // Hz, synthesis-time frequency placement
    PulseShape pulse_shape = PulseShape::RootRaisedCosine;
    std::optional<PulseParams> pulse_params;  // radar waveforms only

    std::size_t samples_per_symbol() const;
    // One-sided extent of the occupied band: |carrier offset| + half the
    // intrinsic bandwidth of the modulation at the configured rates.
    double occupied_bandwidth() const;
    // Fraction of the complex Nyquist band the modulated spectrum covers,
    // in (0, 1]. SNR tags describe the in-band ratio, and white noise puts
    // only this fraction of its energy inside the signal band, so dataset
    // generation scales the whole-band noise level by it.
    double noise_bandwidth_fraction() const;
    void validate() const;  // class table + rate invariants
};

// Documented per-pair defaults: every pair sits on its own carrier offset and
// the four PCW classes differ additionally in PRI and duty cycle.
WaveformSpec default_spec(Modulation m, SignalClass s);

// Noiseless baseband synthesis. The generator draws message content and a
// random start phase/offset from `seed`, so repeated calls with one seed are
// identical and different seeds give independent frames.
ComplexSeries gen_baseband(const WaveformSpec& spec, std::size_t n_samples, std::uint64_t seed);

}  // namespace rfmtl
