// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#include "rotordiag/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace rotordiag {

namespace {

constexpr double kPi = std::numbers::pi;

} // namespace

std::string to_string(Unit u) {
    switch (u) {
        case Unit::volt: return "volt";
        case Unit::g: return "g";
        case Unit::m_per_s2: return "m_per_s2";
        case Unit::m_per_s: return "m_per_s";
        case Unit::m: return "m";
        case Unit::dimensionless: return "dimensionless";
    }
    return "dimensionless";
}

std::string to_string(Role r) {
    switch (r) {
        case Role::vibration: return "vibration";
        case Role::tacho: return "tacho";
        case Role::force: return "force";
    }
    return "vibration";
}

Unit unit_from_string(const std::string& s) {
    if (s == "volt") return Unit::volt;
    if (s == "g") return Unit::g;
    if (s == "m_per_s2") return Unit::m_per_s2;
    if (s == "m_per_s") return Unit::m_per_s;
    if (s == "m") return Unit::m;
    if (s == "dimensionless") return Unit::dimensionless;
    throw FormatError("unknown unit '" + s + "'");
}

Role role_from_string(const std::string& s) {
    if (s == "vibration") return Role::vibration;
    if (s == "tacho") return Role::tacho;
    if (s == "force") return Role::force;
    throw FormatError("unknown role '" + s + "'");
}

ChannelRecord::ChannelRecord(std::string name_, std::vector<double> samples_,
                             double sample_rate_, Unit unit_, Role role_)
    : name(std::move(name_)),
      samples(std::move(samples_)),
      sample_rate(sample_rate_),
      unit(unit_),
      role(role_) {
    validate();
}

void ChannelRecord::validate() const {
    if (!(sample_rate > 0.0)) {
        throw DomainError("channel '" + name + "': sample_rate must be > 0");
    }
    if (samples.empty()) {
        throw LengthError("channel '" + name + "': no samples");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw DataError("channel '" + name + "': non-finite sample at row " +
                            std::to_string(i));
        }
    }
}

void MultiChannelRecord::validate() const {
    if (channels.empty()) {
        throw LengthError("record has no channels");
    }
    const std::size_t n = channels.front().samples.size();
    int tachos = 0;
    for (const auto& ch : channels) {
        ch.validate();
        if (ch.samples.size() != n) {
            throw LengthError("channel '" + ch.name + "' length differs from '" +
                              channels.front().name + "'");
        }
        if (ch.sample_rate != sample_rate) {
            throw DomainError("channel '" + ch.name + "' sample_rate differs from record");
        }
        if (ch.role == Role::tacho) ++tachos;
    }
    if (tachos > 1) {
        throw FormatError("at most one tacho channel allowed, found " + std::to_string(tachos));
    }
}

const ChannelRecord* MultiChannelRecord::find_channel(const std::string& name) const {
    for (const auto& ch : channels) {
        if (ch.name == name) return &ch;
    }
    return nullptr;
}

const ChannelRecord* MultiChannelRecord::tacho_channel() const {
    for (const auto& ch : channels) {
        if (ch.role == Role::tacho) return &ch;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// CSV format

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

double parse_double_strict(const std::string& tok) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw FormatError("cannot parse number '" + tok + "'");
    }
    return v;
}

} // namespace

MultiChannelRecord ingest_csv(std::istream& in) {
    std::string line;

    if (!std::getline(in, line)) throw FormatError("empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string rate_prefix = "# sample_rate_hz=";
    if (line.rfind(rate_prefix, 0) != 0) {
        throw FormatError("line 1 must start with '" + rate_prefix + "'");
    }
    double sample_rate = 0.0;
    try {
        sample_rate = parse_double_strict(line.substr(rate_prefix.size()));
    } catch (const FormatError&) {
        throw FormatError("line 1: invalid sample rate in '" + line + "'");
    }
    if (!(sample_rate > 0.0)) throw FormatError("line 1: sample rate must be > 0");

    if (!std::getline(in, line)) throw FormatError("missing channels header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string ch_prefix = "# channels=";
    if (line.rfind(ch_prefix, 0) != 0) {
        throw FormatError("line 2 must start with '" + ch_prefix + "'");
    }

    MultiChannelRecord rec;
    rec.sample_rate = sample_rate;
    int tacho_count = 0;
    for (const std::string& spec : split(line.substr(ch_prefix.size()), ',')) {
        auto parts = split(spec, ':');
        if (parts.size() != 3 || parts[0].empty()) {
            throw FormatError("channel descriptor '" + spec + "' must be name:unit:role");
        }
        ChannelRecord ch;
        ch.name = parts[0];
        ch.unit = unit_from_string(parts[1]);
        ch.role = role_from_string(parts[2]);
        ch.sample_rate = sample_rate;
        if (ch.role == Role::tacho && ++tacho_count > 1) {
            throw FormatError("at most one tacho channel allowed");
        }
        rec.channels.push_back(std::move(ch));
    }

    const std::size_t n_channels = rec.channels.size();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto toks = split(line, ',');
        if (toks.size() != n_channels) {
            throw LengthError("row " + std::to_string(row) + " has " +
                              std::to_string(toks.size()) + " values, expected " +
                              std::to_string(n_channels));
        }
        for (std::size_t c = 0; c < n_channels; ++c) {
            double v = parse_double_strict(toks[c]);
            if (!std::isfinite(v)) {
                throw DataError("non-finite value at row " + std::to_string(row) +
                                ", channel '" + rec.channels[c].name + "'");
            }
            rec.channels[c].samples.push_back(v);
        }
        ++row;
    }
    if (row == 0) throw LengthError("no sample rows");
    rec.validate();
    return rec;
}

MultiChannelRecord ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return ingest_csv(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    } catch (const LengthError& e) {
        throw LengthError(path + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

namespace detail {

std::string format_sample(double v) {
    std::array<char, 32> buf{};
    int len = std::snprintf(buf.data(), buf.size(), "%.12g", v);
    return std::string(buf.data(), static_cast<std::size_t>(len));
}

} // namespace detail

std::string to_csv(const MultiChannelRecord& rec) {
    rec.validate();
    std::string out;
    out += "# sample_rate_hz=" + detail::format_sample(rec.sample_rate) + "\n";
    out += "# channels=";
    for (std::size_t c = 0; c < rec.channels.size(); ++c) {
        const auto& ch = rec.channels[c];
        if (c) out += ",";
        out += ch.name + ":" + to_string(ch.unit) + ":" + to_string(ch.role);
    }
    out += "\n";
    const std::size_t n = rec.channels.front().samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < rec.channels.size(); ++c) {
            if (c) out += ",";
            out += detail::format_sample(rec.channels[c].samples[i]);
        }
        out += "\n";
    }
    return out;
}

void write_csv(const MultiChannelRecord& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << to_csv(rec);
    if (!out) throw FormatError("write to '" + path + "' failed");
}

std::string to_csv(const SpectrumRecord& spec) {
    std::string out = "frequency_hz,magnitude,phase_rad\n";
    for (std::size_t k = 0; k < spec.frequencies.size(); ++k) {
        out += detail::format_sample(spec.frequencies[k]) + "," +
               detail::format_sample(spec.magnitudes[k]) + "," +
               detail::format_sample(spec.phases[k]) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Calibration

ChannelRecord calibrate(const ChannelRecord& ch, double sensitivity_mv_per_g,
                        bool to_m_per_s2) {
    ch.validate();
    if (ch.unit != Unit::volt) {
        throw UnitError("calibrate expects a volt channel, got " + to_string(ch.unit));
    }
    if (!(sensitivity_mv_per_g > 0.0)) {
        throw DomainError("sensitivity must be > 0 mV/g");
    }
    ChannelRecord out = ch;
    const double volts_per_g = sensitivity_mv_per_g / 1000.0;
    double scale = 1.0 / volts_per_g;
    out.unit = Unit::g;
    if (to_m_per_s2) {
        scale *= 9.80665;
        out.unit = Unit::m_per_s2;
    }
    for (double& v : out.samples) v *= scale;
    return out;
}

// ---------------------------------------------------------------------------
// Spectra

namespace detail {

namespace {

// FFTW planning is not thread safe and the cached buffers are shared, so the
// whole transform is serialized. Spectra are not on the parallel kernels'
// hot paths.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

struct PlanEntry {
    fftw_plan plan = nullptr;
    double* in = nullptr;
    fftw_complex* out = nullptr;

    ~PlanEntry() {
        if (plan) fftw_destroy_plan(plan);
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
};

} // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    std::lock_guard<std::mutex> lock(fftw_mutex());
    static std::map<std::size_t, PlanEntry> cache;
    auto& entry = cache[n];
    if (!entry.plan) {
        entry.in = fftw_alloc_real(n);
        entry.out = fftw_alloc_complex(n / 2 + 1);
        entry.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), entry.in, entry.out,
                                          FFTW_ESTIMATE);
        if (!entry.plan) throw Error("FFTW plan creation failed");
    }
    std::copy(x.begin(), x.end(), entry.in);
    fftw_execute(entry.plan);
    std::vector<std::complex<double>> spec(n / 2 + 1);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        spec[k] = {entry.out[k][0], entry.out[k][1]};
    }
    return spec;
}

} // namespace detail

SpectrumRecord fft_spectrum(const ChannelRecord& ch, Window window) {
    ch.validate();
    const std::size_t n = ch.samples.size();
    if (n < 8) {
        throw LengthError("fft_spectrum needs at least 8 samples, got " + std::to_string(n));
    }

    std::vector<double> x = ch.samples;
    double amplitude_correction = 1.0;
    if (window == Window::hann) {
        for (std::size_t i = 0; i < n; ++i) {
            x[i] *= 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / n));
        }
        amplitude_correction = 2.0;
    }

    auto spec = detail::rfft(x);
    const std::size_t n_bins = spec.size();
    const bool even = (n % 2 == 0);

    SpectrumRecord out;
    out.resolution = ch.sample_rate / static_cast<double>(n);
    out.frequencies.resize(n_bins);
    out.magnitudes.resize(n_bins);
    out.phases.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        out.frequencies[k] = out.resolution * static_cast<double>(k);
        const bool single = (k == 0) || (even && k == n_bins - 1); // DC and Nyquist
        double mag = std::abs(spec[k]) / static_cast<double>(n);
        if (!single) mag *= 2.0;
        out.magnitudes[k] = mag * amplitude_correction;
        double ph = std::arg(spec[k]);
        if (ph <= -kPi) ph += 2.0 * kPi;
        out.phases[k] = ph;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Zero-phase Butterworth high-pass

namespace {

struct Biquad {
    // y[i] = b0 x[i] + b1 x[i-1] + b2 x[i-2] - a1 y[i-1] - a2 y[i-2]
    double b0, b1, b2, a1, a2;
};

// 4th-order Butterworth high-pass as two biquad sections via the bilinear
// transform, each section normalized to unit gain at Nyquist.
std::array<Biquad, 2> design_butter_hp4(double cutoff_hz, double sample_rate) {
    const double warped = 2.0 * sample_rate * std::tan(kPi * cutoff_hz / sample_rate);
    std::array<Biquad, 2> sections{};
    for (int s = 0; s < 2; ++s) {
        // Prototype low-pass pole pair (unit cutoff, left half plane).
        const double theta = kPi * (2.0 * (s + 1) - 1.0) / 8.0 + kPi / 2.0;
        const std::complex<double> proto(std::cos(theta), std::sin(theta));
        const std::complex<double> pole_analog = warped / proto; // LP -> HP
        const std::complex<double> pole_z =
            (2.0 * sample_rate + pole_analog) / (2.0 * sample_rate - pole_analog);
        const double a1 = -2.0 * pole_z.real();
        const double a2 = std::norm(pole_z);
        const double gain = (1.0 - a1 + a2) / 4.0; // |H(z=-1)| = 1
        sections[s] = Biquad{gain, -2.0 * gain, gain, a1, a2};
    }
    return sections;
}

void filter_in_place(const std::array<Biquad, 2>& sos, std::vector<double>& x) {
    for (const auto& q : sos) {
        double z1 = 0.0, z2 = 0.0; // direct form II transposed state
        for (double& v : x) {
            const double in = v;
            const double out = q.b0 * in + z1;
            z1 = q.b1 * in - q.a1 * out + z2;
            z2 = q.b2 * in - q.a2 * out;
            v = out;
        }
    }
}

} // namespace

ChannelRecord highpass_filter(const ChannelRecord& ch, double cutoff_hz) {
    ch.validate();
    const double nyquist = ch.sample_rate / 2.0;
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < nyquist)) {
        throw DomainError("cutoff must lie in (0, " + detail::format_sample(nyquist) +
                          ") Hz, got " + detail::format_sample(cutoff_hz));
    }
    const std::size_t n = ch.samples.size();
    if (n < 4) throw LengthError("highpass_filter needs at least 4 samples");

    const auto sos = design_butter_hp4(cutoff_hz, ch.sample_rate);

    // Odd-reflection padding long enough for the slowest pole transient to die
    // out before the real data begins.
    const std::size_t pad = std::min<std::size_t>(
        n - 1, std::max<std::size_t>(24, static_cast<std::size_t>(
                                             std::ceil(3.0 * ch.sample_rate / cutoff_hz))));
    const auto& x = ch.samples;
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.front() - x[pad - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * x.back() - x[n - 2 - i]);

    filter_in_place(sos, ext);
    std::reverse(ext.begin(), ext.end());
    filter_in_place(sos, ext);
    std::reverse(ext.begin(), ext.end());

    ChannelRecord out = ch;
    out.samples.assign(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                       ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
    return out;
}

// ---------------------------------------------------------------------------
// Resampling

std::vector<double> resample_linear(const ChannelRecord& ch, std::span<const double> times) {
    ch.validate();
    const double span = ch.duration();
    std::vector<double> out;
    out.reserve(times.size());
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : times) {
        if (t < prev) throw DomainError("resample times must be ascending");
        prev = t;
        if (t < 0.0 || t > span) {
            throw RangeError("resample time " + detail::format_sample(t) +
                             " outside record span [0, " + detail::format_sample(span) + "]");
        }
        const double pos = t * ch.sample_rate;
        auto i0 = static_cast<std::size_t>(pos);
        if (i0 >= ch.samples.size() - 1) {
            out.push_back(ch.samples.back());
            continue;
        }
        const double frac = pos - static_cast<double>(i0);
        out.push_back(ch.samples[i0] + frac * (ch.samples[i0 + 1] - ch.samples[i0]));
    }
    return out;
}

} // namespace rotordiag
