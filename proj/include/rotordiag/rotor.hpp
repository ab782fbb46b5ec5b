// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rotordiag/errors.hpp"
#include "rotordiag/signal.hpp"

namespace rotordiag {

/// Second-order model  M q" + (C + omega_spin*G) q' + K q = F.
/// G is the base gyroscopic matrix per rad/s of spin speed.
struct SystemMatrices {
    Eigen::MatrixXd M;
    Eigen::MatrixXd C;
    Eigen::MatrixXd K;
    Eigen::MatrixXd G;
    double omega_spin = 0.0; // rad/s, >= 0

    /// DOF index pairs that form a lateral (y, z) plane; used for whirl
    /// classification. Empty for models without a known spatial layout.
    std::vector<std::pair<int, int>> lateral_pairs;
    std::vector<std::string> dof_names;

    int dof_count() const { return static_cast<int>(M.rows()); }

    /// Effective velocity-coupling matrix C + omega_spin * G.
    Eigen::MatrixXd damping_coupling() const { return C + omega_spin * G; }

    /// Shape and sign checks plus skew-symmetry of G (|G + G^T| <= 1e-12 scale).
    void validate() const;

    /// Additionally demands symmetric M/C/K with M positive definite; throws
    /// SymmetryError / MatrixError when the symmetric solution path is not
    /// applicable.
    void require_symmetric() const;
};

/// Real-mode model extracted from the symmetric path.
struct ModalModel {
    int n_modes = 0;
    std::vector<double> omega_r;    // rad/s, ascending
    std::vector<double> zeta_r;     // damping ratio per mode, in [0, 1)
    Eigen::MatrixXd phi;            // n x n_modes mode shapes, mass-orthogonal
    std::vector<double> modal_mass; // diagonal of phi^T M phi

    /// max |offdiag| / max |diag| of phi^T C phi; > ~1e-8 marks damping the
    /// real-mode model can only approximate.
    double non_proportionality = 0.0;
    bool proportional_damping = true;
};

enum class WhirlSense { forward, backward, planar };

std::string to_string(WhirlSense w);

/// State-space (first companion) eigensolution of the general rotating model.
/// Modes come in conjugate pairs; residues[r] is the n x n numerator matrix of
/// the partial-fraction receptance term value/(i*omega - lambda_r).
struct ComplexModalModel {
    int n = 0;
    std::vector<std::complex<double>> eigenvalues;  // 2n, sorted by |Im|, +Im first
    Eigen::MatrixXcd displacement_modes;            // n x 2n displacement partitions
    std::vector<Eigen::MatrixXcd> residues;         // 2n matrices, n x n
    std::vector<WhirlSense> whirl;                  // per mode, equal within a pair
};

/// Canonical rotor realizing the rotating-frame model: rigid disc on an
/// isotropic shaft, optional tilt DOFs with gyroscopic coupling.
struct JeffcottParams {
    double disc_mass = 0.0;         // kg
    double shaft_stiffness = 0.0;   // N/m per lateral direction
    double damping_ratio = 0.0;
    double polar_inertia = 0.0;     // kg m^2
    double diametral_inertia = 0.0; // kg m^2
    double unbalance_mass_ecc = 0.0; // kg m

    void validate() const;
};

/// Builds the Jeffcott system matrices. With zero inertias the model has the
/// two lateral DOFs (y, z); with diametral inertia > 0 it gains the tilt pair
/// (theta_y, theta_z) whose gyroscopic coupling scales with polar inertia.
SystemMatrices build_jeffcott(const JeffcottParams& p);

/// Undamped eigensolution of the symmetric model, damping ratio per mode from
/// projecting C onto the mass-orthogonal mode shapes.
ModalModel eigen_symmetric(const SystemMatrices& sys);

/// Companion-matrix eigensolution of M q" + (C + omega_spin*G) q' + K q = 0,
/// with receptance residues and whirl classification.
ComplexModalModel eigen_general(const SystemMatrices& sys);

/// Monotone piecewise-linear spin-speed profile Omega(t).
class SpeedRamp {
  public:
    /// Breakpoints (time s, speed rad/s); times strictly ascending from 0,
    /// speeds >= 0 and monotone (either direction).
    explicit SpeedRamp(std::vector<std::pair<double, double>> breakpoints);

    static SpeedRamp linear(double omega_start, double omega_end, double duration);
    static SpeedRamp constant(double omega, double duration);

    double duration() const { return points_.back().first; }
    double omega_at(double t) const;
    /// Accumulated shaft angle, integral of omega over [0, t].
    double angle_at(double t) const;

  private:
    std::vector<std::pair<double, double>> points_;
    std::vector<double> angles_; // angle at each breakpoint
};

/// Rotating unbalance force (F_y, F_z) for mass-eccentricity me at spin speed
/// omega and shaft angle theta.
Eigen::Vector2d unbalance_force(double mass_ecc, double omega, double theta);

/// Newmark-beta (1/4, 1/2) time integration from zero initial state.
/// Emits one displacement channel per DOF plus one force channel per DOF.
MultiChannelRecord simulate_response(const SystemMatrices& sys,
                                     const std::function<Eigen::VectorXd(double)>& forcing,
                                     double dt, double duration);

/// Unbalance-forced run following the speed ramp; the gyroscopic coupling
/// tracks Omega(t) step by step. Emits y, z and a once-per-rev tacho channel
/// (pulse width 5% of a revolution, amplitude 5, baseline 0).
MultiChannelRecord simulate_rundown(const SystemMatrices& sys, const JeffcottParams& p,
                                    const SpeedRamp& profile, double dt, double duration);

/// Versioned JSON export of modal models.
std::string to_json(const ModalModel& m);
std::string to_json(const ComplexModalModel& m);
ModalModel modal_from_json(const std::string& text);

} // namespace rotordiag
