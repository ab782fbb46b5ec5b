// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "rotordiag/exec.hpp"
#include "rotordiag/rotor.hpp"
#include "rotordiag/signal.hpp"

namespace rotordiag {

enum class FrfMethod { modal_symmetric, modal_general, direct, estimated_h1 };

std::string to_string(FrfMethod m);

/// Complex receptance (m/N) between coordinates j and k over a frequency grid.
/// j = k = -1 marks a curve estimated from measured channels.
struct FrfCurve {
    std::vector<double> frequencies; // rad/s, ascending
    std::vector<std::complex<double>> values;
    int j = 0;
    int k = 0;
    FrfMethod method = FrfMethod::direct;

    void validate() const;
};

/// Real-mode superposition: sum_r phi_jr phi_kr / (M_r (w_r^2 - w^2 + 2 i w zeta_r w_r)).
std::complex<double> receptance_symmetric(const ModalModel& m, double omega, int j, int k);

/// Complex-mode superposition over all 2n state-space modes,
/// sum_r residue_jk^(r) / (i w - lambda_r); conjugate pairs are both stored in
/// the model, so the sum needs no explicit conjugate term.
std::complex<double> receptance_general(const ComplexModalModel& cm, double omega, int j, int k);

/// Exact receptance matrix [K - w^2 M + i w (C + spin G)]^-1; the oracle the
/// modal paths are validated against.
Eigen::MatrixXcd receptance_direct(const SystemMatrices& sys, double omega);

/// Curve builders over caller-supplied grids; per-frequency evaluations are
/// independent and run under the requested execution policy.
FrfCurve frf_curve_symmetric(const ModalModel& m, std::span<const double> omegas, int j, int k,
                             Exec exec = Exec::parallel);
FrfCurve frf_curve_general(const ComplexModalModel& cm, std::span<const double> omegas, int j,
                           int k, Exec exec = Exec::parallel);
FrfCurve frf_curve_direct(const SystemMatrices& sys, std::span<const double> omegas, int j, int k,
                          Exec exec = Exec::parallel);

struct H1Estimate {
    FrfCurve frf;                  // method = estimated_h1
    std::vector<double> coherence; // in [0, 1] per bin
};

/// Welch/H1 estimator: Hann-windowed segment averages of cross over force
/// auto spectra.
H1Estimate estimate_frf_h1(const ChannelRecord& force, const ChannelRecord& response,
                           int n_averages, double overlap_fraction);

struct ModalPeak {
    double omega = 0.0;     // rad/s at the grid point of the maximum
    double zeta = 0.0;      // from the half-power bandwidth
    double amplitude = 0.0; // |alpha| at the peak
    bool zeta_valid = false; // false when -3 dB bands overlap or are unresolved
};

/// Local |alpha| maxima above 2x the median level; damping from the -3 dB
/// bandwidth, refused when neighbouring bands overlap.
std::vector<ModalPeak> peak_pick_modal(const FrfCurve& curve);

/// CSV export `frequency_rad_s,real,imag,magnitude,phase_rad` and its JSON
/// sidecar {j, k, method}.
std::string to_csv(const FrfCurve& curve);
std::string sidecar_json(const FrfCurve& curve);

} // namespace rotordiag
