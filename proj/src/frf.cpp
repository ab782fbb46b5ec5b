// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#include "rotordiag/frf.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rotordiag {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::complex<double> kImag(0.0, 1.0);

void check_index(int idx, int n, const char* which) {
    if (idx < 0 || idx >= n) {
        throw IndexError(std::string(which) + " index " + std::to_string(idx) +
                         " outside 0.." + std::to_string(n - 1));
    }
}

} // namespace

std::string to_string(FrfMethod m) {
    switch (m) {
        case FrfMethod::modal_symmetric: return "modal_symmetric";
        case FrfMethod::modal_general: return "modal_general";
        case FrfMethod::direct: return "direct";
        case FrfMethod::estimated_h1: return "estimated_h1";
    }
    return "direct";
}

void FrfCurve::validate() const {
    if (frequencies.size() != values.size()) {
        throw LengthError("FRF curve frequency/value length mismatch");
    }
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
            throw DomainError("FRF frequencies must be strictly ascending");
        }
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag())) {
            throw DataError("non-finite FRF value at index " + std::to_string(i));
        }
    }
}

std::complex<double> receptance_symmetric(const ModalModel& m, double omega, int j, int k) {
    const int n = static_cast<int>(m.phi.rows());
    check_index(j, n, "j");
    check_index(k, n, "k");
    if (!(omega >= 0.0)) throw DomainError("omega must be >= 0");
    std::complex<double> acc(0.0, 0.0);
    for (int r = 0; r < m.n_modes; ++r) {
        const double wr = m.omega_r[r];
        const std::complex<double> den =
            m.modal_mass[r] *
            std::complex<double>(wr * wr - omega * omega, 2.0 * omega * m.zeta_r[r] * wr);
        acc += m.phi(j, r) * m.phi(k, r) / den;
    }
    return acc;
}

std::complex<double> receptance_general(const ComplexModalModel& cm, double omega, int j, int k) {
    check_index(j, cm.n, "j");
    check_index(k, cm.n, "k");
    if (!(omega >= 0.0)) throw DomainError("omega must be >= 0");
    std::complex<double> acc(0.0, 0.0);
    for (int r = 0; r < 2 * cm.n; ++r) {
        acc += cm.residues[r](j, k) / (kImag * omega - cm.eigenvalues[r]);
    }
    return acc;
}

Eigen::MatrixXcd receptance_direct(const SystemMatrices& sys, double omega) {
    sys.validate();
    const int n = sys.dof_count();
    Eigen::MatrixXcd dynamic_stiffness =
        (sys.K - omega * omega * sys.M).cast<std::complex<double>>() +
        kImag * omega * sys.damping_coupling().cast<std::complex<double>>();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(dynamic_stiffness);
    if (!lu.isInvertible()) {
        std::string detail;
        try {
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
                0.5 * (sys.K + sys.K.transpose()), 0.5 * (sys.M + sys.M.transpose()),
                Eigen::EigenvaluesOnly);
            double nearest = 0.0;
            double best = std::numeric_limits<double>::infinity();
            for (int r = 0; r < n; ++r) {
                const double wr = std::sqrt(std::max(0.0, es.eigenvalues()[r]));
                if (std::abs(wr - omega) < best) {
                    best = std::abs(wr - omega);
                    nearest = wr;
                }
            }
            detail = "; nearest undamped natural frequency " + std::to_string(nearest) +
                     " rad/s";
        } catch (const Error&) {
        }
        throw SingularityError("dynamic stiffness singular at omega=" + std::to_string(omega) +
                               detail);
    }
    return lu.inverse();
}

namespace {

template <typename EvalFn>
FrfCurve build_curve(std::span<const double> omegas, int j, int k, FrfMethod method, Exec exec,
                     EvalFn&& eval) {
    FrfCurve curve;
    curve.frequencies.assign(omegas.begin(), omegas.end());
    curve.values.resize(omegas.size());
    for_each_index(exec, static_cast<std::ptrdiff_t>(omegas.size()),
                   [&](std::ptrdiff_t i) { curve.values[i] = eval(omegas[i]); });
    curve.j = j;
    curve.k = k;
    curve.method = method;
    curve.validate();
    return curve;
}

} // namespace

FrfCurve frf_curve_symmetric(const ModalModel& m, std::span<const double> omegas, int j, int k,
                             Exec exec) {
    return build_curve(omegas, j, k, FrfMethod::modal_symmetric, exec,
                       [&](double w) { return receptance_symmetric(m, w, j, k); });
}

FrfCurve frf_curve_general(const ComplexModalModel& cm, std::span<const double> omegas, int j,
                           int k, Exec exec) {
    return build_curve(omegas, j, k, FrfMethod::modal_general, exec,
                       [&](double w) { return receptance_general(cm, w, j, k); });
}

FrfCurve frf_curve_direct(const SystemMatrices& sys, std::span<const double> omegas, int j, int k,
                          Exec exec) {
    const int n = sys.dof_count();
    check_index(j, n, "j");
    check_index(k, n, "k");
    return build_curve(omegas, j, k, FrfMethod::direct, exec,
                       [&](double w) { return receptance_direct(sys, w)(j, k); });
}

// ---------------------------------------------------------------------------
// H1 estimation

H1Estimate estimate_frf_h1(const ChannelRecord& force, const ChannelRecord& response,
                           int n_averages, double overlap_fraction) {
    force.validate();
    response.validate();
    if (force.unit == Unit::volt || response.unit == Unit::volt) {
        throw UnitError("estimate_frf_h1 rejects uncalibrated volt channels");
    }
    if (force.sample_rate != response.sample_rate) {
        throw DomainError("force and response sample rates differ");
    }
    if (force.samples.size() != response.samples.size()) {
        throw LengthError("force and response lengths differ");
    }
    if (n_averages < 2) throw DomainError("n_averages must be >= 2");
    if (!(overlap_fraction >= 0.0) || !(overlap_fraction < 1.0)) {
        throw DomainError("overlap_fraction must lie in [0, 1)");
    }

    const std::size_t n = force.samples.size();
    auto seg_len = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) /
                   (1.0 + (n_averages - 1) * (1.0 - overlap_fraction))));
    seg_len &= ~std::size_t{1}; // even
    auto hop = static_cast<std::size_t>(
        std::floor(static_cast<double>(seg_len) * (1.0 - overlap_fraction)));
    hop = std::max<std::size_t>(hop, 1);
    while (seg_len >= 16 && seg_len + (n_averages - 1) * hop > n) {
        seg_len -= 2;
        hop = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(seg_len * (1.0 - overlap_fraction))));
    }
    if (seg_len < 16) {
        throw LengthError("record too short for " + std::to_string(n_averages) + " averages");
    }

    std::vector<double> window(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / seg_len));
    }

    const std::size_t n_bins = seg_len / 2 + 1;
    std::vector<double> gff(n_bins, 0.0), gyy(n_bins, 0.0);
    std::vector<std::complex<double>> gyf(n_bins, {0.0, 0.0});
    std::vector<double> f_seg(seg_len), y_seg(seg_len);
    for (int a = 0; a < n_averages; ++a) {
        const std::size_t start = static_cast<std::size_t>(a) * hop;
        for (std::size_t i = 0; i < seg_len; ++i) {
            f_seg[i] = force.samples[start + i] * window[i];
            y_seg[i] = response.samples[start + i] * window[i];
        }
        const auto f_spec = detail::rfft(f_seg);
        const auto y_spec = detail::rfft(y_seg);
        for (std::size_t b = 0; b < n_bins; ++b) {
            gff[b] += std::norm(f_spec[b]);
            gyy[b] += std::norm(y_spec[b]);
            gyf[b] += y_spec[b] * std::conj(f_spec[b]);
        }
    }

    H1Estimate out;
    out.frf.j = -1;
    out.frf.k = -1;
    out.frf.method = FrfMethod::estimated_h1;
    out.frf.frequencies.resize(n_bins);
    out.frf.values.resize(n_bins);
    out.coherence.resize(n_bins);
    const double df = force.sample_rate / static_cast<double>(seg_len);
    for (std::size_t b = 0; b < n_bins; ++b) {
        out.frf.frequencies[b] = 2.0 * kPi * df * static_cast<double>(b);
        if (gff[b] > 0.0 && gyy[b] > 0.0) {
            out.frf.values[b] = gyf[b] / gff[b];
            out.coherence[b] = std::clamp(std::norm(gyf[b]) / (gff[b] * gyy[b]), 0.0, 1.0);
        } else {
            out.frf.values[b] = {0.0, 0.0};
            out.coherence[b] = 0.0;
        }
    }
    out.frf.validate();
    return out;
}

// ---------------------------------------------------------------------------
// Peak picking

std::vector<ModalPeak> peak_pick_modal(const FrfCurve& curve) {
    curve.validate();
    const std::size_t n = curve.frequencies.size();
    if (n < 5) return {};
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(curve.values[i]);

    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[n / 2];
    const double global_max = sorted.back();
    const double threshold = std::max(2.0 * median, 1e-9 * global_max);

    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (mags[i] > mags[i - 1] && mags[i] > mags[i + 1] && mags[i] >= threshold) {
            peaks.push_back(i);
        }
    }

    std::vector<ModalPeak> out;
    std::vector<std::pair<double, double>> bands(peaks.size());
    for (std::size_t p = 0; p < peaks.size(); ++p) {
        const std::size_t i = peaks[p];
        const double level = mags[i] / std::sqrt(2.0);
        double w_lo = std::numeric_limits<double>::quiet_NaN();
        double w_hi = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t l = i; l-- > 0;) {
            if (mags[l] <= level) {
                const double f = (level - mags[l]) / (mags[l + 1] - mags[l]);
                w_lo = curve.frequencies[l] +
                       f * (curve.frequencies[l + 1] - curve.frequencies[l]);
                break;
            }
            if (l > 0 && mags[l] > mags[l + 1] && mags[l] > mags[l - 1]) break; // next peak
        }
        for (std::size_t r = i + 1; r < n; ++r) {
            if (mags[r] <= level) {
                const double f = (mags[r - 1] - level) / (mags[r - 1] - mags[r]);
                w_hi = curve.frequencies[r - 1] +
                       f * (curve.frequencies[r] - curve.frequencies[r - 1]);
                break;
            }
            if (r + 1 < n && mags[r] > mags[r + 1] && mags[r] > mags[r - 1]) break;
        }
        ModalPeak peak;
        peak.omega = curve.frequencies[i];
        peak.amplitude = mags[i];
        if (std::isfinite(w_lo) && std::isfinite(w_hi)) {
            peak.zeta = (w_hi - w_lo) / (2.0 * peak.omega);
            peak.zeta_valid = true;
            bands[p] = {w_lo, w_hi};
        } else {
            bands[p] = {curve.frequencies[i], curve.frequencies[i]};
        }
        out.push_back(peak);
    }

    // Refuse half-power damping when neighbouring -3 dB bands overlap.
    for (std::size_t p = 0; p + 1 < out.size(); ++p) {
        if (out[p].zeta_valid && out[p + 1].zeta_valid &&
            bands[p].second >= bands[p + 1].first) {
            out[p].zeta_valid = false;
            out[p + 1].zeta_valid = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Export

std::string to_csv(const FrfCurve& curve) {
    std::string out = "frequency_rad_s,real,imag,magnitude,phase_rad\n";
    for (std::size_t i = 0; i < curve.frequencies.size(); ++i) {
        const auto v = curve.values[i];
        double phase = std::arg(v);
        if (phase <= -kPi) phase += 2.0 * kPi;
        out += detail::format_sample(curve.frequencies[i]) + "," +
               detail::format_sample(v.real()) + "," + detail::format_sample(v.imag()) + "," +
               detail::format_sample(std::abs(v)) + "," + detail::format_sample(phase) + "\n";
    }
    return out;
}

std::string sidecar_json(const FrfCurve& curve) {
    nlohmann::json doc;
    doc["j"] = curve.j;
    doc["k"] = curve.k;
    doc["method"] = to_string(curve.method);
    return doc.dump(2) + "\n";
}

} // namespace rotordiag
