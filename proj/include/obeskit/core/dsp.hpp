#pragma once

#include <cstddef>
#include <vector>

namespace obeskit::dsp {

// One second-order section, direct form II transposed.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;  // denominator, a0 normalized to 1
};

using Sos = std::vector<Biquad>;

// Butterworth band-pass of the given order (pole pairs = order), designed by
// bilinear transform with frequency prewarping. Peak gain normalized to 1.
Sos butter_bandpass(int order, double lo_hz, double hi_hz, double rate_hz);

// Magnitude response of a cascade at one frequency.
double sos_gain(const Sos& sos, double freq_hz, double rate_hz);

// Single forward pass with steady-state initial conditions scaled to x[0].
std::vector<double> sos_filter(const Sos& sos, const std::vector<double>& x);

// Zero-phase filtering: odd-reflection padding, forward then reverse pass.
std::vector<double> filtfilt(const Sos& sos, const std::vector<double>& x);

// Power per frequency bin via direct DFT, bins 0..N/2 (spacing rate/N).
std::vector<double> power_spectrum(const std::vector<double>& x);

// Welch-style band power: splits x into 1 s subframes, averages bin powers,
// then sums bins into `bands` equal-width bands over [0, rate/2]. Band 0
// includes DC. Subframe length is rate_hz samples.
std::vector<double> band_power(const std::vector<double>& x, double rate_hz, int bands);

// Spectral entropy (normalized to [0,1]) and dominant non-DC frequency of the
// averaged 1 s periodogram. Returns {entropy, dominant_hz}.
struct SpectralSummary {
    double entropy = 0.0;
    double dominant_hz = 0.0;
};
SpectralSummary spectral_summary(const std::vector<double>& x, double rate_hz);

double mean(const std::vector<double>& x);
double stddev(const std::vector<double>& x);  // population
double median(std::vector<double> x);         // by value, sorts a copy

}  // namespace obeskit::dsp
