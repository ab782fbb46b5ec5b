// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rotordiag/errors.hpp"

namespace rotordiag {

enum class Unit { volt, g, m_per_s2, m_per_s, m, dimensionless };
enum class Role { vibration, tacho, force };

std::string to_string(Unit u);
std::string to_string(Role r);
Unit unit_from_string(const std::string& s);
Role role_from_string(const std::string& s);

/// One uniformly sampled channel in engineering units. Sample i lies at
/// time i / sample_rate relative to the start of the owning record.
struct ChannelRecord {
    std::string name;
    std::vector<double> samples;
    double sample_rate = 0.0; // Hz
    Unit unit = Unit::dimensionless;
    Role role = Role::vibration;

    ChannelRecord() = default;
    ChannelRecord(std::string name_, std::vector<double> samples_, double sample_rate_,
                  Unit unit_, Role role_);

    /// Time of the last sample relative to the first.
    double duration() const { return samples.empty() ? 0.0 : (samples.size() - 1) / sample_rate; }

    /// Throws unless sample_rate > 0, samples are non-empty and all finite.
    void validate() const;
};

/// A set of equally long, equally sampled channels with at most one tacho.
struct MultiChannelRecord {
    std::vector<ChannelRecord> channels;
    double sample_rate = 0.0;
    double start_time = 0.0; // display metadata; not persisted in CSV

    void validate() const;
    const ChannelRecord* find_channel(const std::string& name) const;
    const ChannelRecord* tacho_channel() const;
};

/// Single-sided amplitude spectrum. Bin k sits at k * resolution Hz.
struct SpectrumRecord {
    std::vector<double> frequencies; // Hz, ascending from 0
    std::vector<double> magnitudes;  // amplitude, unit of the source channel
    std::vector<double> phases;      // radians in (-pi, pi]
    double resolution = 0.0;         // Hz
};

enum class Window { rectangular, hann };

/// Reads the CSV time-data format:
///   line 1: `# sample_rate_hz=<float>`
///   line 2: `# channels=<name:unit:role>[,...]`
///   then one comma-separated row of samples per instant.
MultiChannelRecord ingest_csv(const std::string& path);
MultiChannelRecord ingest_csv(std::istream& in);

/// Serializes a record in the same format (values at 12 significant digits,
/// which preserves any value originally printed at 9).
std::string to_csv(const MultiChannelRecord& rec);
void write_csv(const MultiChannelRecord& rec, const std::string& path);

/// CSV export of a spectrum, header `frequency_hz,magnitude,phase_rad`.
std::string to_csv(const SpectrumRecord& spec);

/// Converts a raw transducer channel from volts to g (or m/s^2) using the
/// accelerometer sensitivity in mV/g.
ChannelRecord calibrate(const ChannelRecord& ch, double sensitivity_mv_per_g,
                        bool to_m_per_s2 = false);

/// Single-sided amplitude spectrum with amplitude-corrected windowing
/// (Hann correction factor 2.0).
SpectrumRecord fft_spectrum(const ChannelRecord& ch, Window window);

/// Zero-phase high-pass: 4th-order Butterworth applied forward-backward, so
/// orbit shapes are not rotated by filter phase lag.
ChannelRecord highpass_filter(const ChannelRecord& ch, double cutoff_hz);

/// Linear interpolation of the channel at the requested instants (seconds
/// relative to the record start, ascending, inside the record span).
std::vector<double> resample_linear(const ChannelRecord& ch, std::span<const double> times);

namespace detail {
/// Forward complex spectrum of a real sequence, bins 0..floor(n/2).
/// Backed by FFTW; serialized internally, safe to call from any thread.
std::vector<std::complex<double>> rfft(std::span<const double> x);

/// Formats one sample the way the CSV writer does.
std::string format_sample(double v);
} // namespace detail

} // namespace rotordiag
