#include "rfmtl/waveform.hpp"

#include <cmath>

#include "rfmtl/errors.hpp"

namespace rfmtl {

const char* modulation_name(Modulation m) {
    switch (m) {
        case Modulation::BPSK: return "BPSK";
        case Modulation::ASK: return "ASK";
        case Modulation::AmDsb: return "AM-DSB";
        case Modulation::AmSsb: return "AM-SSB";
        case Modulation::GFSK: return "GFSK";
        case Modulation::DsssCck: return "DSSS-CCK";
        case Modulation::DsssOqpsk: return "DSSS-OQPSK";
        case Modulation::FMCW: return "FMCW";
        case Modulation::PCW: return "PCW";
    }
    throw ClassTableError("unknown modulation value");
}

const char* signal_class_name(SignalClass s) {
    switch (s) {
        case SignalClass::Satcom: return "SATCOM";
        case SignalClass::ShortRange: return "Short-Range";
        case SignalClass::AmRadio: return "AM Radio";
        case SignalClass::Bluetooth: return "Bluetooth";
        case SignalClass::Ieee80211bg: return "IEEE802.11bg";
        case SignalClass::Ieee802154: return "IEEE802.15.4";
        case SignalClass::RadarAltimeter: return "Radar-Altimeter";
        case SignalClass::AirborneDetection: return "Airborne-detection";
        case SignalClass::AirborneRange: return "Airborne-range";
        case SignalClass::GroundMapping: return "Ground-mapping";
        case SignalClass::AirGroundMti: return "Air-Ground-MTI";
    }
    throw ClassTableError("unknown signal class value");
}

Modulation modulation_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumModulations; ++i)
        if (name == modulation_name((Modulation)i)) return (Modulation)i;
    throw ClassTableError("unknown modulation name: " + name);
}

SignalClass signal_class_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumSignalClasses; ++i)
        if (name == signal_class_name((SignalClass)i)) return (SignalClass)i;
    throw ClassTableError("unknown signal class name: " + name);
}

const std::vector<ClassPair>& class_table() {
    static const std::vector<ClassPair> table = {
        {Modulation::BPSK, SignalClass::Satcom},
        {Modulation::ASK, SignalClass::ShortRange},
        {Modulation::AmDsb, SignalClass::AmRadio},
        {Modulation::AmSsb, SignalClass::AmRadio},
        {Modulation::GFSK, SignalClass::Bluetooth},
        {Modulation::DsssCck, SignalClass::Ieee80211bg},
        {Modulation::DsssOqpsk, SignalClass::Ieee802154},
        {Modulation::FMCW, SignalClass::RadarAltimeter},
        {Modulation::PCW, SignalClass::AirborneDetection},
        {Modulation::PCW, SignalClass::AirborneRange},
        {Modulation::PCW, SignalClass::GroundMapping},
        {Modulation::PCW, SignalClass::AirGroundMti},
    };
    return table;
}

bool pair_allowed(Modulation m, SignalClass s) {
    for (const ClassPair& p : class_table())
        if (p.mod == m && p.sig == s) return true;
    return false;
}

const std::vector<ClassPair>& synthesizable_pairs() {
    // Every table pair has a generator here; the GFSK/CCK/OQPSK entries are
    // stand-ins for classes whose original data came from recordings.
    return class_table();
}

std::size_t WaveformSpec::samples_per_symbol() const {
    if (symbol_rate <= 0.0 || sample_rate <= 0.0)
        throw ConfigError("waveform spec: rates must be positive");
    const double sps = sample_rate / symbol_rate;
    const double rounded = std::round(sps);
    if (std::fabs(sps - rounded) > 1e-9 || rounded < 2.0)
        throw ConfigError("waveform spec: sample rate must be an integer multiple (>= 2) "
                          "of the symbol rate");
    return (std::size_t)rounded;
}

namespace {

// One-sided width of the modulated spectrum around its carrier, per class.
double half_bandwidth(const WaveformSpec& s) {
    switch (s.modulation) {
        case Modulation::BPSK:
        case Modulation::ASK:
            return 0.675 * s.symbol_rate;  // root-raised-cosine, rolloff 0.35
        case Modulation::AmDsb:
        case Modulation::AmSsb:
            return 5500.0;  // message tones drawn from a few hundred Hz up to 5 kHz
        case Modulation::GFSK:
            return 0.66 * s.symbol_rate;  // Carson-style: deviation + Gaussian-filtered lobe
        case Modulation::DsssCck:
            return s.symbol_rate;  // rectangular chips: first null at the chip rate
        case Modulation::DsssOqpsk:
            return 0.75 * s.symbol_rate;  // half-sine chips: narrower main lobe
        case Modulation::FMCW:
            return s.pulse_params ? s.pulse_params->chirp_bandwidth_hz / 2.0 : 0.0;
        case Modulation::PCW: {
            if (!s.pulse_params || s.pulse_params->pulse_width_s <= 0.0) return 0.0;
            return 1.0 / s.pulse_params->pulse_width_s;  // main lobe of the pulse envelope
        }
    }
    return 0.0;
}

}  // namespace

double WaveformSpec::occupied_bandwidth() const {
    return std::fabs(carrier_offset) + half_bandwidth(*this);
}

double WaveformSpec::noise_bandwidth_fraction() const {
    // SSB keeps one sideband, so its band is half_bandwidth wide, not twice.
    const double width = modulation == Modulation::AmSsb ? half_bandwidth(*this)
                                                         : 2.0 * half_bandwidth(*this);
    if (width <= 0.0 || sample_rate <= 0.0) return 1.0;
    return std::min(1.0, width / sample_rate);
}

void WaveformSpec::validate() const {
    if (!pair_allowed(modulation, signal_class))
        throw ClassTableError(std::string("pairing ") + modulation_name(modulation) + " with " +
                              signal_class_name(signal_class) + " is outside the class table");
    (void)samples_per_symbol();  // throws unless integral and >= 2
    if (sample_rate <= 2.0 * occupied_bandwidth())
        throw ConfigError("waveform spec: occupied bandwidth exceeds the Nyquist band");
    const bool is_radar = modulation == Modulation::FMCW || modulation == Modulation::PCW;
    if (is_radar && !pulse_params)
        throw ConfigError("waveform spec: radar waveforms need pulse parameters");
    if (modulation == Modulation::PCW) {
        if (pulse_params->pri_s <= 0.0 || pulse_params->pulse_width_s <= 0.0 ||
            pulse_params->pulse_width_s > pulse_params->pri_s)
            throw ConfigError("waveform spec: need 0 < pulse width <= PRI");
    }
    if (modulation == Modulation::FMCW) {
        if (pulse_params->sweep_s <= 0.0 || pulse_params->chirp_bandwidth_hz <= 0.0)
            throw ConfigError("waveform spec: need positive sweep time and chirp bandwidth");
    }
}

WaveformSpec default_spec(Modulation m, SignalClass s) {
    if (!pair_allowed(m, s))
        throw ClassTableError(std::string("pairing ") + modulation_name(m) + " with " +
                              signal_class_name(s) + " is outside the class table");
    WaveformSpec spec;
    spec.modulation = m;
    spec.signal_class = s;
    spec.sample_rate = 128000.0;

    // Every pair gets a distinct carrier offset; rates and radar timing are
    // chosen so all symbol/PRI lengths divide the sample rate exactly.
    switch (m) {
        case Modulation::BPSK:
            spec.symbol_rate = 16000.0;
            spec.carrier_offset = 10000.0;
            break;
        case Modulation::ASK:
            spec.symbol_rate = 16000.0;
            spec.carrier_offset = -8000.0;
            break;
        case Modulation::AmDsb:
            spec.symbol_rate = 16000.0;  // unused by the generator, kept valid
            spec.carrier_offset = 2500.0;
            break;
        case Modulation::AmSsb:
            spec.symbol_rate = 16000.0;
            spec.carrier_offset = -15000.0;
            break;
        case Modulation::GFSK:
            spec.symbol_rate = 16000.0;
            spec.carrier_offset = 19000.0;
            break;
        case Modulation::DsssCck:
            spec.symbol_rate = 32000.0;  // chip rate; 8-chip codewords
            spec.carrier_offset = -23000.0;
            break;
        case Modulation::DsssOqpsk:
            spec.symbol_rate = 32000.0;  // chip rate; 15-chip spreading
            spec.carrier_offset = 28000.0;
            break;
        case Modulation::FMCW: {
            spec.symbol_rate = 2000.0;  // one 64-sample sweep per "symbol"
            spec.carrier_offset = -30000.0;
            PulseParams pp;
            pp.sweep_s = 64.0 / spec.sample_rate;
            pp.chirp_bandwidth_hz = 0.4 * spec.sample_rate;
            spec.pulse_params = pp;
            break;
        }
        case Modulation::PCW: {
            PulseParams pp;
            switch (s) {
                case SignalClass::AirborneDetection:  // PRI 64, duty 0.25
                    spec.symbol_rate = 2000.0;
                    spec.carrier_offset = 38000.0;
                    pp.pri_s = 64.0 / spec.sample_rate;
                    pp.pulse_width_s = 16.0 / spec.sample_rate;
                    break;
                case SignalClass::AirborneRange:  // PRI 32, duty 0.5
                    spec.symbol_rate = 4000.0;
                    spec.carrier_offset = 46000.0;
                    pp.pri_s = 32.0 / spec.sample_rate;
                    pp.pulse_width_s = 16.0 / spec.sample_rate;
                    break;
                case SignalClass::GroundMapping:  // PRI 128, duty 0.125
                    spec.symbol_rate = 1000.0;
                    spec.carrier_offset = -42000.0;
                    pp.pri_s = 128.0 / spec.sample_rate;
                    pp.pulse_width_s = 16.0 / spec.sample_rate;
                    break;
                default:  // Air-Ground-MTI: PRI 80, duty 0.4
                    spec.symbol_rate = 1600.0;
                    spec.carrier_offset = -50000.0;
                    pp.pri_s = 80.0 / spec.sample_rate;
                    pp.pulse_width_s = 32.0 / spec.sample_rate;
                    break;
            }
            spec.pulse_params = pp;
            break;
        }
    }
    spec.validate();
    return spec;
}

}  // namespace rfmtl
