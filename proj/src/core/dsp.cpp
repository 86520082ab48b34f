#include "obeskit/core/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include "obeskit/common.hpp"

namespace obeskit::dsp {

namespace {

using cplx = std::complex<double>;

// Steady-state filter state for a unit-step input, direct form II transposed.
// Scaling by x[0] before the pass suppresses the start-up transient.
void steady_state(const Biquad& q, double& s0, double& s1) {
    const double dc_num = q.b0 + q.b1 + q.b2;
    const double dc_den = 1.0 + q.a1 + q.a2;
    const double v = std::abs(dc_den) > 1e-300 ? dc_num / dc_den : 0.0;
    s1 = q.b2 - q.a2 * v;
    s0 = q.b1 - q.a1 * v + s1;
}

std::vector<double> run_cascade(const Sos& sos, const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const Biquad& q : sos) {
        double s0, s1;
        steady_state(q, s0, s1);
        const double x0 = y.empty() ? 0.0 : y.front();
        s0 *= x0;
        s1 *= x0;
        for (double& v : y) {
            const double in = v;
            const double out = q.b0 * in + s0;
            s0 = q.b1 * in - q.a1 * out + s1;
            s1 = q.b2 * in - q.a2 * out;
            v = out;
        }
    }
    return y;
}

}  // namespace

Sos butter_bandpass(int order, double lo_hz, double hi_hz, double rate_hz) {
    if (order < 1 || order > 8) throw InternalError("butter_bandpass: unsupported order");
    if (!(lo_hz > 0.0 && hi_hz > lo_hz && hi_hz < rate_hz / 2.0))
        throw InternalError("butter_bandpass: band outside (0, nyquist)");

    const double fs2 = 2.0 * rate_hz;
    const double w1 = fs2 * std::tan(M_PI * lo_hz / rate_hz);
    const double w2 = fs2 * std::tan(M_PI * hi_hz / rate_hz);
    const double w0 = std::sqrt(w1 * w2);
    const double bw = w2 - w1;

    // Analog prototype poles on the unit circle, left half-plane.
    std::vector<cplx> proto(order);
    for (int k = 0; k < order; ++k) {
        const double theta = M_PI * (2.0 * k + order + 1.0) / (2.0 * order);
        proto[k] = cplx(std::cos(theta), std::sin(theta));
    }

    // Low-pass -> band-pass: each prototype pole yields a pole pair.
    std::vector<cplx> apoles;
    apoles.reserve(2 * order);
    for (const cplx& p : proto) {
        const cplx pb = p * (bw / 2.0);
        const cplx disc = std::sqrt(pb * pb - w0 * w0);
        apoles.push_back(pb + disc);
        apoles.push_back(pb - disc);
    }

    // Bilinear transform.
    std::vector<cplx> zpoles;
    zpoles.reserve(apoles.size());
    for (const cplx& s : apoles) {
        zpoles.push_back((cplx(fs2) + s) / (cplx(fs2) - s));
    }

    // Group into conjugate pairs: sort by (|imag| desc, real) and take pairs.
    std::sort(zpoles.begin(), zpoles.end(), [](const cplx& a, const cplx& b) {
        const double ia = std::abs(a.imag()), ib = std::abs(b.imag());
        if (ia != ib) return ia > ib;
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() > b.imag();
    });

    Sos sos;
    for (std::size_t i = 0; i + 1 < zpoles.size(); i += 2) {
        const cplx p = zpoles[i];
        Biquad q;
        q.b0 = 1.0;
        q.b1 = 0.0;
        q.b2 = -1.0;  // zeros at z = +1 and z = -1
        q.a1 = -2.0 * p.real();
        q.a2 = std::norm(p);
        sos.push_back(q);
    }

    // Normalize so gain at the digital center frequency is 1.
    const double fc = std::atan(w0 / fs2) * rate_hz / M_PI;
    const double g = sos_gain(sos, fc, rate_hz);
    if (g <= 0.0) throw InternalError("butter_bandpass: degenerate design");
    sos.front().b0 /= g;
    sos.front().b1 /= g;
    sos.front().b2 /= g;
    return sos;
}

double sos_gain(const Sos& sos, double freq_hz, double rate_hz) {
    const double w = 2.0 * M_PI * freq_hz / rate_hz;
    const cplx z = std::polar(1.0, w);
    const cplx z1 = 1.0 / z;
    const cplx z2 = z1 * z1;
    cplx h(1.0, 0.0);
    for (const Biquad& q : sos) {
        h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
    }
    return std::abs(h);
}

std::vector<double> sos_filter(const Sos& sos, const std::vector<double>& x) {
    return run_cascade(sos, x);
}

std::vector<double> filtfilt(const Sos& sos, const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 2) return std::vector<double>(n, 0.0);

    std::size_t pad = 3 * (2 * sos.size() + 1);
    pad = std::min(pad, n - 1);

    // Odd reflection about the endpoints.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.front() - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.back() - x[n - 2 - i]);

    std::vector<double> y = run_cascade(sos, ext);
    std::reverse(y.begin(), y.end());
    y = run_cascade(sos, y);
    std::reverse(y.begin(), y.end());
    return std::vector<double>(y.begin() + pad, y.begin() + pad + n);
}

std::vector<double> power_spectrum(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> p(n / 2 + 1, 0.0);
    if (n == 0) return p;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double re = 0.0, im = 0.0;
        const double w = -2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = w * static_cast<double>(i);
            re += x[i] * std::cos(a);
            im += x[i] * std::sin(a);
        }
        p[k] = (re * re + im * im) / static_cast<double>(n);
    }
    return p;
}

namespace {

// Averaged 1 s periodogram; returns per-bin power, bins 0..rate/2 at 1 Hz.
std::vector<double> averaged_periodogram(const std::vector<double>& x, double rate_hz) {
    const std::size_t sub = std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(rate_hz)));
    const std::size_t nsub = x.size() / sub;
    std::vector<double> acc(sub / 2 + 1, 0.0);
    if (nsub == 0) {
        std::vector<double> padded(x);
        padded.resize(sub, x.empty() ? 0.0 : x.back());
        return power_spectrum(padded);
    }
    for (std::size_t s = 0; s < nsub; ++s) {
        std::vector<double> seg(x.begin() + s * sub, x.begin() + (s + 1) * sub);
        std::vector<double> p = power_spectrum(seg);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
    }
    for (double& v : acc) v /= static_cast<double>(nsub);
    return acc;
}

}  // namespace

std::vector<double> band_power(const std::vector<double>& x, double rate_hz, int bands) {
    const std::vector<double> p = averaged_periodogram(x, rate_hz);
    std::vector<double> out(bands, 0.0);
    if (p.size() < 2) return out;
    const double nyq = rate_hz / 2.0;
    const double bin_hz = nyq / static_cast<double>(p.size() - 1);
    for (std::size_t k = 0; k < p.size(); ++k) {
        int b = static_cast<int>(static_cast<double>(k) * bin_hz / (nyq / bands));
        b = std::min(b, bands - 1);
        out[b] += p[k];
    }
    return out;
}

SpectralSummary spectral_summary(const std::vector<double>& x, double rate_hz) {
    const std::vector<double> p = averaged_periodogram(x, rate_hz);
    SpectralSummary s;
    if (p.size() < 3) return s;
    const double bin_hz = (rate_hz / 2.0) / static_cast<double>(p.size() - 1);

    double total = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) total += p[k];
    if (total <= 0.0) return s;  // flat signal: entropy 0, dominant 0 by convention

    double h = 0.0;
    std::size_t kmax = 1;
    for (std::size_t k = 1; k < p.size(); ++k) {
        const double q = p[k] / total;
        if (q > 0.0) h -= q * std::log(q);
        if (p[k] > p[kmax]) kmax = k;
    }
    s.entropy = h / std::log(static_cast<double>(p.size() - 1));
    s.dominant_hz = static_cast<double>(kmax) * bin_hz;
    return s;
}

double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    const double m = mean(x);
    double acc = 0.0;
    for (double v : x) acc += (v - m) * (v - m);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

double median(std::vector<double> x) {
    if (x.empty()) return 0.0;
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();
    return n % 2 == 1 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

}  // namespace obeskit::dsp
