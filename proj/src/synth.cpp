// Baseband generators for the twelve (modulation, signal class) pairs.
// All randomness is drawn from one Rng in a fixed order, so a given
// (spec, n_samples, seed) triple always produces the same series.

#include <cmath>
#include <complex>
#include <vector>

#include "rfmtl/errors.hpp"
#include "rfmtl/rng.hpp"
#include "rfmtl/waveform.hpp"

namespace rfmtl {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Rotate the series up to the carrier offset with a random initial phase.
void apply_carrier(ComplexSeries& s, double f_offset_hz, double fs, Rng& rng) {
    const double phi0 = rng.uniform(0.0, 2.0 * kPi);
    const double step = 2.0 * kPi * f_offset_hz / fs;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const double phi = phi0 + step * (double)n;
        s[n] *= ComplexSample((float)std::cos(phi), (float)std::sin(phi));
    }
}

// Root-raised-cosine pulse, peak-normalized, evaluated at t symbols from center.
double rrc_at(double t, double beta) {
    const double eps = 1e-9;
    double v;
    if (std::fabs(t) < eps) {
        v = 1.0 - beta + 4.0 * beta / kPi;
    } else if (std::fabs(std::fabs(t) - 1.0 / (4.0 * beta)) < eps) {
        v = (beta / std::sqrt(2.0)) *
            ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * beta)) +
             (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * beta)));
    } else {
        const double num = std::sin(kPi * t * (1.0 - beta)) +
                           4.0 * beta * t * std::cos(kPi * t * (1.0 + beta));
        const double den = kPi * t * (1.0 - (4.0 * beta * t) * (4.0 * beta * t));
        v = num / den;
    }
    return v / (1.0 - beta + 4.0 * beta / kPi);  // peak at t = 0 becomes 1
}

// Linear pulse-amplitude series: real symbol levels shaped by either
// rectangular hold or a root-raised-cosine pulse spanning +-4 symbols.
ComplexSeries pam(const WaveformSpec& spec, std::size_t n, Rng& rng,
                  const std::vector<double>& levels) {
    constexpr int kSpan = 4;
    constexpr double kBeta = 0.35;
    const std::size_t sps = spec.samples_per_symbol();
    const std::size_t n_sym = n / sps + 2 * kSpan + 2;
    std::vector<double> sym(n_sym);
    for (double& a : sym) a = levels[rng.uniform_below(levels.size())];
    const std::size_t off = rng.uniform_below(sps);  // random symbol-clock phase

    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = (double)(i + off) / (double)sps;  // in symbol units
        double acc = 0.0;
        if (spec.pulse_shape == PulseShape::Rectangular) {
            acc = sym[(std::size_t)pos];
        } else {
            const long k0 = (long)pos;
            for (long k = k0 - kSpan; k <= k0 + kSpan; ++k) {
                if (k < 0 || (std::size_t)k >= n_sym) continue;
                acc += sym[(std::size_t)k] * rrc_at(pos - (double)k, kBeta);
            }
        }
        out[i] = ComplexSample((float)acc, 0.0f);
    }
    return out;
}

// Shared three-tone message for the analog pairs: random frequencies in the
// voice band, random phases, amplitudes in [0.5, 1], normalized so |m| <= 1.
struct ToneSet {
    double f[3], phi[3], a[3], a_sum;
};

ToneSet draw_tones(Rng& rng) {
    ToneSet t{};
    t.a_sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        t.f[k] = rng.uniform(300.0, 5000.0);
        t.phi[k] = rng.uniform(0.0, 2.0 * kPi);
        t.a[k] = rng.uniform(0.5, 1.0);
        t.a_sum += t.a[k];
    }
    return t;
}

ComplexSeries am_dsb(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    const ToneSet t = draw_tones(rng);
    constexpr double kIndex = 0.5;
    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (int k = 0; k < 3; ++k)
            m += t.a[k] * std::cos(2.0 * kPi * t.f[k] * (double)i / spec.sample_rate + t.phi[k]);
        out[i] = ComplexSample((float)(1.0 + kIndex * m / t.a_sum), 0.0f);
    }
    return out;
}

ComplexSeries am_ssb(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    // Upper sideband of a tone mixture: for pure tones the analytic signal is
    // a sum of positive-frequency exponentials, so no filtering is needed.
    const ToneSet t = draw_tones(rng);
    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc(0.0, 0.0);
        for (int k = 0; k < 3; ++k) {
            const double arg = 2.0 * kPi * t.f[k] * (double)i / spec.sample_rate + t.phi[k];
            acc += t.a[k] * std::complex<double>(std::cos(arg), std::sin(arg));
        }
        acc /= t.a_sum;
        out[i] = ComplexSample((float)acc.real(), (float)acc.imag());
    }
    return out;
}

ComplexSeries gfsk(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    constexpr double kBt = 0.5;          // Gaussian filter bandwidth-time product
    constexpr double kModIndex = 0.32;   // peak-to-peak deviation / symbol rate
    constexpr int kSpanSym = 2;          // phase pulse truncated to +-2 symbols
    const std::size_t sps = spec.samples_per_symbol();

    // Frequency pulse: rectangular symbol gate convolved with a Gaussian,
    // normalized so each symbol advances the phase by pi * h * bit.
    const double sigma_t = std::sqrt(std::log(2.0)) / (2.0 * kPi * kBt);  // in symbols
    const int plen = (int)sps * (2 * kSpanSym + 1);
    std::vector<double> pulse(plen, 0.0);
    double psum = 0.0;
    for (int i = 0; i < plen; ++i) {
        const double t = ((double)i - (double)(plen - 1) / 2.0) / (double)sps;
        double acc = 0.0;
        const int kGrid = 64;  // numeric convolution of the gate with the Gaussian
        for (int g = 0; g < kGrid; ++g) {
            const double u = -0.5 + ((double)g + 0.5) / (double)kGrid;
            const double d = (t - u) / sigma_t;
            acc += std::exp(-0.5 * d * d);
        }
        pulse[i] = acc;
        psum += acc;
    }
    for (double& p : pulse) p *= (double)sps / psum;  // total area = sps samples

    const std::size_t n_sym = n / sps + 2 * kSpanSym + 4;
    std::vector<double> bits(n_sym);
    for (double& b : bits) b = rng.bernoulli(0.5) ? 1.0 : -1.0;
    const std::size_t off = rng.uniform_below(sps);

    ComplexSeries out(n);
    double phase = rng.uniform(0.0, 2.0 * kPi);
    for (std::size_t i = 0; i < n; ++i) {
        const long idx = (long)(i + off);
        double finst = 0.0;  // instantaneous frequency in cycles/sample * 2
        for (std::size_t k = 0; k < n_sym; ++k) {
            const long j = idx - (long)(k * sps);
            if (j < 0 || j >= plen) continue;
            finst += bits[k] * pulse[j];
        }
        phase += kPi * kModIndex * finst / (double)sps;
        out[i] = ComplexSample((float)std::cos(phase), (float)std::sin(phase));
    }
    return out;
}

ComplexSeries dsss_cck(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    // 8-chip complementary-code keying at the 11b-style high rate: four QPSK
    // phases (one differentially encoded) spread over a fixed codeword shape.
    const std::size_t spc = spec.samples_per_symbol();  // samples per chip
    const std::size_t sym_len = 8 * spc;
    const std::size_t n_sym = n / sym_len + 2;
    const double qpsk[4] = {0.0, kPi / 2.0, kPi, 3.0 * kPi / 2.0};

    std::vector<std::complex<double>> chips;
    chips.reserve(n_sym * 8);
    double phi1_acc = rng.uniform(0.0, 2.0 * kPi);
    for (std::size_t s = 0; s < n_sym; ++s) {
        phi1_acc += qpsk[rng.uniform_below(4)];  // differential first phase
        const double p1 = phi1_acc;
        const double p2 = qpsk[rng.uniform_below(4)];
        const double p3 = qpsk[rng.uniform_below(4)];
        const double p4 = qpsk[rng.uniform_below(4)];
        const double args[8] = {p1 + p2 + p3 + p4, p1 + p3 + p4, p1 + p2 + p4, p1 + p4,
                                p1 + p2 + p3,      p1 + p3,      p1 + p2,      p1};
        const double sign[8] = {1, 1, 1, -1, 1, 1, -1, 1};
        for (int c = 0; c < 8; ++c)
            chips.push_back(sign[c] * std::complex<double>(std::cos(args[c]), std::sin(args[c])));
    }

    const std::size_t off = rng.uniform_below(sym_len);
    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::complex<double> c = chips[(i + off) / spc];
        out[i] = ComplexSample((float)c.real(), (float)c.imag());
    }
    return out;
}

ComplexSeries dsss_oqpsk(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    // 15-chip m-sequence spreading with half-sine chip shaping and the
    // quadrature arm delayed by half a chip period pair (one chip time).
    const std::size_t spc = spec.samples_per_symbol();  // samples per chip
    // Maximal-length sequence from x^4 + x + 1.
    int pn[15];
    unsigned lfsr = 0b1000;
    for (int i = 0; i < 15; ++i) {
        const unsigned bit = ((lfsr >> 3) ^ lfsr) & 1u;
        pn[i] = (lfsr & 1u) ? 1 : -1;
        lfsr = (lfsr >> 1) | (bit << 3);
    }

    const std::size_t n_chip = n / spc + 8;
    std::vector<int> chip(n_chip);
    const std::size_t n_bits = n_chip / 15 + 2;
    std::vector<int> data(n_bits);
    for (int& b : data) b = rng.bernoulli(0.5) ? 1 : -1;
    for (std::size_t i = 0; i < n_chip; ++i) chip[i] = data[i / 15] * pn[i % 15];

    // Half-sine pulse over two chip periods; I uses even chips, Q odd chips,
    // with Q offset by one chip period.
    const std::size_t plen = 2 * spc;
    const std::size_t off = rng.uniform_below(plen);
    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long idx = (long)(i + off);
        double iacc = 0.0, qacc = 0.0;
        // Even chip k occupies samples [k*spc, k*spc + plen) on I;
        // odd chip k occupies [k*spc, k*spc + plen) on Q (inherent offset).
        const long kmax = idx / (long)spc;
        for (long k = kmax - 1; k <= kmax; ++k) {
            if (k < 0 || (std::size_t)k >= n_chip) continue;
            const long j = idx - k * (long)spc;
            if (j < 0 || (std::size_t)j >= plen) continue;
            const double p = std::sin(kPi * (double)j / (double)plen);
            if (k % 2 == 0)
                iacc += chip[(std::size_t)k] * p;
            else
                qacc += chip[(std::size_t)k] * p;
        }
        out[i] = ComplexSample((float)iacc, (float)qacc);
    }
    return out;
}

ComplexSeries fmcw(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    const double fs = spec.sample_rate;
    const PulseParams& pp = *spec.pulse_params;
    const std::size_t sweep_len = (std::size_t)std::llround(pp.sweep_s * fs);
    const double bw = pp.chirp_bandwidth_hz;
    const std::size_t off = rng.uniform_below(sweep_len);
    double phase = rng.uniform(0.0, 2.0 * kPi);
    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pos = (i + off) % sweep_len;  // sawtooth sweep position
        const double finst = -bw / 2.0 + bw * (double)pos / (double)sweep_len;
        phase += 2.0 * kPi * finst / fs;
        out[i] = ComplexSample((float)std::cos(phase), (float)std::sin(phase));
    }
    return out;
}

ComplexSeries pcw(const WaveformSpec& spec, std::size_t n, Rng& rng) {
    const double fs = spec.sample_rate;
    const PulseParams& pp = *spec.pulse_params;
    const std::size_t pri = (std::size_t)std::llround(pp.pri_s * fs);
    const std::size_t width = (std::size_t)std::ceil(pp.pulse_width_s * fs - 1e-9);
    const std::size_t off = rng.uniform_below(pri);
    ComplexSeries out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool on = ((i + off) % pri) < width;
        out[i] = ComplexSample(on ? 1.0f : 0.0f, 0.0f);
    }
    return out;
}

}  // namespace

ComplexSeries gen_baseband(const WaveformSpec& spec, std::size_t n_samples, std::uint64_t seed) {
    spec.validate();
    if (n_samples == 0) throw ConfigError("gen_baseband: n_samples must be positive");
    Rng rng(seed);
    ComplexSeries s;
    switch (spec.modulation) {
        case Modulation::BPSK:
            s = pam(spec, n_samples, rng, {-1.0, 1.0});
            break;
        case Modulation::ASK:
            s = pam(spec, n_samples, rng, {0.25, 1.0});
            break;
        case Modulation::AmDsb:
            s = am_dsb(spec, n_samples, rng);
            break;
        case Modulation::AmSsb:
            s = am_ssb(spec, n_samples, rng);
            break;
        case Modulation::GFSK:
            s = gfsk(spec, n_samples, rng);
            break;
        case Modulation::DsssCck:
            s = dsss_cck(spec, n_samples, rng);
            break;
        case Modulation::DsssOqpsk:
            s = dsss_oqpsk(spec, n_samples, rng);
            break;
        case Modulation::FMCW:
            s = fmcw(spec, n_samples, rng);
            break;
        case Modulation::PCW:
            s = pcw(spec, n_samples, rng);
            break;
    }
    apply_carrier(s, spec.carrier_offset, spec.sample_rate, rng);
    return s;
}

}  // namespace rfmtl
