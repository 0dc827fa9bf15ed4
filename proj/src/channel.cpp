#include "rfmtl/channel.hpp"

#include <cassert>
#include <cmath>
#include <complex>

#include "rfmtl/errors.hpp"
#include "rfmtl/rng.hpp"

namespace rfmtl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kWindow = 128;  // SNR reference window

// Reflect v into [-vmax, vmax]. One reflection suffices for the small steps
// these walks take; assert guards the assumption.
double reflect_clip(double v, double vmax) {
    if (v > vmax) v = 2.0 * vmax - v;
    if (v < -vmax) v = -2.0 * vmax - v;
    assert(std::fabs(v) <= vmax + 1e-9);
    return v;
}

// Windowed-sinc read of x at fractional position pos. Integer positions
// reproduce the sample exactly; out-of-range taps read as zero.
std::complex<double> frac_read(const ComplexSeries& x, double pos, std::size_t taps) {
    const long k0 = (long)std::floor(pos);
    const long lo = k0 - (long)((taps - 1) / 2);
    const double half = ((double)taps + 1.0) / 2.0;
    std::complex<double> acc(0.0, 0.0);
    double wsum = 0.0;
    for (long k = lo; k < lo + (long)taps; ++k) {
        const double u = (double)k - pos;
        const double sinc = std::fabs(u) < 1e-12 ? 1.0 : std::sin(kPi * u) / (kPi * u);
        const double win = 0.5 * (1.0 + std::cos(kPi * u / half));
        const double w = sinc * win;
        wsum += w;
        if (k < 0 || (std::size_t)k >= x.size()) continue;
        acc += w * std::complex<double>(x[(std::size_t)k].real(), x[(std::size_t)k].imag());
    }
    if (std::fabs(wsum) < 1e-12) return {0.0, 0.0};
    return acc / wsum;
}

// One tap's time-varying Rician gain: a line-of-sight phasor plus an
// equal-power sum of sinusoids, with Doppler shifts drawn per component.
struct RicianProcess {
    double a_los, a_diffuse;
    double f_los, phi_los;
    std::vector<double> f, phi;

    RicianProcess(double k_factor, std::size_t n_sin, double max_doppler, Rng& rng) {
        a_los = std::sqrt(k_factor / (k_factor + 1.0));
        a_diffuse = std::sqrt(1.0 / ((k_factor + 1.0) * (double)n_sin));
        f_los = max_doppler * std::cos(rng.uniform(0.0, 2.0 * kPi));
        phi_los = rng.uniform(0.0, 2.0 * kPi);
        f.resize(n_sin);
        phi.resize(n_sin);
        for (std::size_t i = 0; i < n_sin; ++i) {
            f[i] = max_doppler * std::cos(rng.uniform(0.0, 2.0 * kPi));
            phi[i] = rng.uniform(0.0, 2.0 * kPi);
        }
    }

    std::complex<double> at(double t_seconds) const {
        std::complex<double> g =
            a_los * std::polar(1.0, 2.0 * kPi * f_los * t_seconds + phi_los);
        for (std::size_t i = 0; i < f.size(); ++i)
            g += a_diffuse * std::polar(1.0, 2.0 * kPi * f[i] * t_seconds + phi[i]);
        return g;
    }
};

void check_finite(const ComplexSeries& x, const char* who) {
    for (const ComplexSample& s : x)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw NumericInputError(std::string(who) + ": non-finite input sample");
}

}  // namespace

void ChannelConfig::validate() const {
    if (sample_rate <= 0.0) throw ConfigError("channel: sample rate must be positive");
    if (cfo_stddev_hz < 0.0 || sro_stddev_hz < 0.0)
        throw ConfigError("channel: walk step stddev must be non-negative");
    if (cfo_max_hz < 0.0 || sro_max_hz < 0.0)
        throw ConfigError("channel: walk caps must be non-negative");
    if (std::fabs(cfo_initial_hz) > cfo_max_hz + 1e-12 ||
        std::fabs(sro_initial_hz) > sro_max_hz + 1e-12)
        throw ConfigError("channel: initial offset exceeds its cap");
    if (fading_enabled) {
        if (rician_k < 0.0) throw ConfigError("channel: Rician K must be non-negative");
        if (fading_num_sinusoids == 0)
            throw ConfigError("channel: fading needs at least one sinusoid");
        if (max_doppler_hz < 0.0) throw ConfigError("channel: Doppler must be non-negative");
        if (pdp_delays_samples.empty() || pdp_delays_samples.size() != pdp_magnitudes.size())
            throw ConfigError("channel: power-delay profile delays/magnitudes must match");
        for (double d : pdp_delays_samples)
            if (d < 0.0) throw ConfigError("channel: tap delays must be non-negative");
        for (double m : pdp_magnitudes)
            if (m < 0.0) throw ConfigError("channel: tap magnitudes must be non-negative");
    }
    if (interp_taps == 0) throw ConfigError("channel: interpolator needs at least one tap");
    if (awgn_snr_db && !std::isfinite(*awgn_snr_db))
        throw ConfigError("channel: SNR must be finite");
}

ChannelConfig ChannelConfig::awgn_only(double snr_db) {
    ChannelConfig c;
    c.awgn_snr_db = snr_db;
    return c;
}

ChannelConfig ChannelConfig::dynamic_canonical(std::optional<double> snr_db) {
    ChannelConfig c;
    c.cfo_stddev_hz = 0.05;
    c.cfo_max_hz = 250.0;
    c.sro_stddev_hz = 0.05;
    c.sro_max_hz = 60.0;
    c.fading_enabled = true;
    c.fading_num_sinusoids = 5;
    c.max_doppler_hz = 2.0;
    c.rician_k = 3.0;
    c.pdp_delays_samples = {0.2, 0.3, 0.1};
    c.pdp_magnitudes = {1.0, 0.5, 0.5};
    c.interp_taps = 5;
    c.awgn_snr_db = snr_db;
    return c;
}

ComplexSeries apply_awgn(const ComplexSeries& x, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) throw ConfigError("apply_awgn: SNR must be finite");
    check_finite(x, "apply_awgn");
    Rng rng(seed);
    const double snr_lin = std::pow(10.0, snr_db / 10.0);
    ComplexSeries out(x.size());
    for (std::size_t w = 0; w < x.size(); w += kWindow) {
        const std::size_t len = std::min(kWindow, x.size() - w);
        double energy = 0.0;
        for (std::size_t i = w; i < w + len; ++i)
            energy += (double)x[i].real() * x[i].real() + (double)x[i].imag() * x[i].imag();
        if (energy == 0.0) {
            for (std::size_t i = w; i < w + len; ++i) out[i] = x[i];
            continue;
        }
        // Expected noise energy over the window = len * sigma^2.
        const double sigma2 = energy / ((double)len * snr_lin);
        const double s = std::sqrt(sigma2 / 2.0);
        for (std::size_t i = w; i < w + len; ++i) {
            out[i] = ComplexSample(x[i].real() + (float)(s * rng.gaussian()),
                                   x[i].imag() + (float)(s * rng.gaussian()));
        }
    }
    return out;
}

ComplexSeries apply_dynamic_channel(const ComplexSeries& x, const ChannelConfig& cfg,
                                    std::uint64_t seed) {
    cfg.validate();
    check_finite(x, "apply_dynamic_channel");
    const double fs = cfg.sample_rate;
    const std::size_t n = x.size();

    // Stage 1: sample-rate offset. The read clock advances by 1 + delta/fs
    // samples per output sample, with delta following a clipped random walk.
    ComplexSeries after_sro(n);
    if (cfg.sro_stddev_hz == 0.0 && cfg.sro_initial_hz == 0.0) {
        after_sro = x;
    } else {
        Rng rng(derive_seed(seed, 1));
        double delta = cfg.sro_initial_hz;
        double pos = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> v = frac_read(x, pos, cfg.interp_taps);
            after_sro[i] = ComplexSample((float)v.real(), (float)v.imag());
            pos += 1.0 + delta / fs;
            if (cfg.sro_stddev_hz > 0.0)
                delta = reflect_clip(delta + rng.gaussian(0.0, cfg.sro_stddev_hz),
                                     cfg.sro_max_hz);
        }
    }

    // Stage 2: carrier-frequency offset, phase-accumulated so a constant
    // offset matches the closed-form rotation exactly.
    ComplexSeries after_cfo(n);
    if (cfg.cfo_stddev_hz == 0.0 && cfg.cfo_initial_hz == 0.0) {
        after_cfo = after_sro;
    } else {
        Rng rng(derive_seed(seed, 2));
        double f = cfg.cfo_initial_hz;
        double phase = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> rot = std::polar(1.0, phase);
            const std::complex<double> v(after_sro[i].real(), after_sro[i].imag());
            const std::complex<double> y = v * rot;
            after_cfo[i] = ComplexSample((float)y.real(), (float)y.imag());
            phase += 2.0 * kPi * f / fs;
            if (cfg.cfo_stddev_hz > 0.0)
                f = reflect_clip(f + rng.gaussian(0.0, cfg.cfo_stddev_hz), cfg.cfo_max_hz);
        }
    }

    // Stage 3: selective Rician fading over the fractional-delay profile.
    ComplexSeries after_fade(n);
    if (!cfg.fading_enabled) {
        after_fade = after_cfo;
    } else {
        Rng rng(derive_seed(seed, 3));
        std::vector<RicianProcess> taps;
        taps.reserve(cfg.pdp_delays_samples.size());
        for (std::size_t t = 0; t < cfg.pdp_delays_samples.size(); ++t)
            taps.emplace_back(cfg.rician_k, cfg.fading_num_sinusoids, cfg.max_doppler_hz, rng);
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> acc(0.0, 0.0);
            const double t_sec = (double)i / fs;
            for (std::size_t t = 0; t < taps.size(); ++t) {
                const double d = cfg.pdp_delays_samples[t];
                const std::complex<double> xt =
                    frac_read(after_cfo, (double)i - d, cfg.interp_taps);
                acc += cfg.pdp_magnitudes[t] * taps[t].at(t_sec) * xt;
            }
            after_fade[i] = ComplexSample((float)acc.real(), (float)acc.imag());
        }
    }

    // Stage 4: additive noise.
    if (cfg.awgn_snr_db) return apply_awgn(after_fade, *cfg.awgn_snr_db, derive_seed(seed, 4));
    return after_fade;
}

}  // namespace rfmtl
