// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#include "rotordiag/rotor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rotordiag {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_symmetric(const Eigen::MatrixXd& a, double rel_tol = 1e-10) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

} // namespace

void SystemMatrices::validate() const {
    const auto n = M.rows();
    if (n == 0) throw DomainError("empty system");
    for (const auto* m : {&M, &C, &K, &G}) {
        if (m->rows() != n || m->cols() != n) {
            throw DomainError("system matrices must all be n x n");
        }
        if (!m->allFinite()) throw DataError("non-finite entry in system matrices");
    }
    if (!(omega_spin >= 0.0)) throw DomainError("omega_spin must be >= 0");
    const double g_scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    if ((G + G.transpose()).cwiseAbs().maxCoeff() > 1e-12 * g_scale) {
        throw DomainError("G must be skew-symmetric");
    }
    for (const auto& [j, k] : lateral_pairs) {
        if (j < 0 || k < 0 || j >= n || k >= n || j == k) {
            throw DomainError("invalid lateral DOF pair");
        }
    }
}

void SystemMatrices::require_symmetric() const {
    validate();
    if (!is_symmetric(M) || !is_symmetric(C) || !is_symmetric(K)) {
        throw SymmetryError("matrices are not symmetric; use eigen_general");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
        throw MatrixError("M is not positive definite");
    }
}

void JeffcottParams::validate() const {
    if (!(disc_mass > 0.0)) throw DomainError("disc_mass must be > 0");
    if (!(shaft_stiffness > 0.0)) throw DomainError("shaft_stiffness must be > 0");
    if (damping_ratio < 0.0) throw DomainError("damping_ratio must be >= 0");
    if (polar_inertia < 0.0 || diametral_inertia < 0.0) {
        throw DomainError("inertias must be >= 0");
    }
    if (unbalance_mass_ecc < 0.0) throw DomainError("unbalance_mass_ecc must be >= 0");
    if (polar_inertia > 0.0 && diametral_inertia == 0.0) {
        throw DomainError("polar inertia without diametral inertia leaves the tilt DOFs massless");
    }
}

SystemMatrices build_jeffcott(const JeffcottParams& p) {
    p.validate();
    const double m = p.disc_mass;
    const double k = p.shaft_stiffness;
    const double c = 2.0 * p.damping_ratio * std::sqrt(k * m);

    SystemMatrices sys;
    if (p.diametral_inertia == 0.0) {
        sys.M = Eigen::MatrixXd::Zero(2, 2);
        sys.C = Eigen::MatrixXd::Zero(2, 2);
        sys.K = Eigen::MatrixXd::Zero(2, 2);
        sys.G = Eigen::MatrixXd::Zero(2, 2);
        sys.M.diagonal() << m, m;
        sys.K.diagonal() << k, k;
        sys.C.diagonal() << c, c;
        sys.lateral_pairs = {{0, 1}};
        sys.dof_names = {"y", "z"};
    } else {
        // Tilt stiffness from the midspan-disc relations (48EI/L^3 lateral,
        // 12EI/L tilt) evaluated for a unit-length span: k_t = k/4 N m/rad.
        const double kt = 0.25 * k;
        const double ct = 2.0 * p.damping_ratio * std::sqrt(kt * p.diametral_inertia);
        sys.M = Eigen::MatrixXd::Zero(4, 4);
        sys.C = Eigen::MatrixXd::Zero(4, 4);
        sys.K = Eigen::MatrixXd::Zero(4, 4);
        sys.G = Eigen::MatrixXd::Zero(4, 4);
        sys.M.diagonal() << m, m, p.diametral_inertia, p.diametral_inertia;
        sys.K.diagonal() << k, k, kt, kt;
        sys.C.diagonal() << c, c, ct, ct;
        sys.G(2, 3) = p.polar_inertia;
        sys.G(3, 2) = -p.polar_inertia;
        sys.lateral_pairs = {{0, 1}, {2, 3}};
        sys.dof_names = {"y", "z", "theta_y", "theta_z"};
    }
    sys.omega_spin = 0.0;
    sys.validate();
    return sys;
}

// ---------------------------------------------------------------------------
// Symmetric eigensolution

ModalModel eigen_symmetric(const SystemMatrices& sys) {
    sys.require_symmetric();
    const double g_scale = sys.G.cwiseAbs().maxCoeff();
    if (sys.omega_spin != 0.0 && g_scale != 0.0) {
        throw SymmetryError("spinning gyroscopic system is non-symmetric; use eigen_general");
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sys.K, sys.M);
    if (solver.info() != Eigen::Success) {
        throw MatrixError("generalized symmetric eigensolution failed");
    }

    const int n = sys.dof_count();
    ModalModel out;
    out.n_modes = n;
    out.phi = solver.eigenvectors(); // phi^T M phi = I
    out.omega_r.resize(n);
    for (int r = 0; r < n; ++r) {
        out.omega_r[r] = std::sqrt(std::max(0.0, solver.eigenvalues()[r]));
    }

    // Deterministic basis inside repeated-frequency groups: order by dominant
    // DOF index, largest component positive.
    int group_start = 0;
    auto canonicalize = [&](int lo, int hi) {
        std::vector<int> idx(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        auto dominant = [&](int col) {
            int best = 0;
            for (int j = 1; j < n; ++j) {
                if (std::abs(out.phi(j, col)) > std::abs(out.phi(best, col)) + 1e-14) best = j;
            }
            return best;
        };
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return dominant(a) < dominant(b); });
        Eigen::MatrixXd cols(n, hi - lo);
        for (int i = 0; i < hi - lo; ++i) cols.col(i) = out.phi.col(idx[i]);
        out.phi.middleCols(lo, hi - lo) = cols;
    };
    for (int r = 1; r <= n; ++r) {
        const bool boundary =
            (r == n) || (out.omega_r[r] - out.omega_r[group_start] >
                         1e-9 * std::max(1.0, out.omega_r[r]));
        if (boundary) {
            if (r - group_start > 1) canonicalize(group_start, r);
            group_start = r;
        }
    }
    for (int r = 0; r < n; ++r) {
        int j_max = 0;
        for (int j = 1; j < n; ++j) {
            if (std::abs(out.phi(j, r)) > std::abs(out.phi(j_max, r))) j_max = j;
        }
        if (out.phi(j_max, r) < 0.0) out.phi.col(r) *= -1.0;
    }

    const Eigen::MatrixXd mm = out.phi.transpose() * sys.M * out.phi;
    out.modal_mass.resize(n);
    for (int r = 0; r < n; ++r) out.modal_mass[r] = mm(r, r);

    const Eigen::MatrixXd cm = out.phi.transpose() * sys.C * out.phi;
    out.zeta_r.resize(n);
    double max_diag = 0.0, max_off = 0.0;
    for (int r = 0; r < n; ++r) {
        max_diag = std::max(max_diag, std::abs(cm(r, r)));
        for (int s = 0; s < n; ++s) {
            if (s != r) max_off = std::max(max_off, std::abs(cm(r, s)));
        }
        const double omega = out.omega_r[r];
        double zeta = 0.0;
        if (omega > 1e-12) zeta = cm(r, r) / (2.0 * omega * out.modal_mass[r]);
        if (zeta < 0.0 && zeta > -1e-12) zeta = 0.0;
        if (zeta < 0.0 || zeta >= 1.0) {
            throw DomainError("mode " + std::to_string(r) +
                              " is outside the underdamped range (zeta=" + std::to_string(zeta) +
                              ")");
        }
        out.zeta_r[r] = zeta;
    }
    out.non_proportionality = (max_diag > 0.0) ? max_off / max_diag : max_off;
    out.proportional_damping = out.non_proportionality < 1e-8;
    return out;
}

// ---------------------------------------------------------------------------
// General (state-space) eigensolution

std::string to_string(WhirlSense w) {
    switch (w) {
        case WhirlSense::forward: return "forward";
        case WhirlSense::backward: return "backward";
        case WhirlSense::planar: return "planar";
    }
    return "planar";
}

namespace {

WhirlSense classify_whirl(const Eigen::VectorXcd& shape,
                          const std::vector<std::pair<int, int>>& pairs) {
    if (pairs.empty()) return WhirlSense::planar;
    double best_mag = -1.0;
    std::complex<double> uj, uk;
    for (const auto& [j, k] : pairs) {
        const double mag = std::norm(shape[j]) + std::norm(shape[k]);
        if (mag > best_mag) {
            best_mag = mag;
            uj = shape[j];
            uk = shape[k];
        }
    }
    if (best_mag <= 0.0) return WhirlSense::planar;
    const double cross = std::imag(std::conj(uj) * uk);
    if (std::abs(cross) < 1e-6 * best_mag / 2.0) return WhirlSense::planar;
    // Spin is counterclockwise in the (y, z) plane for omega_spin >= 0; a mode
    // precessing the same way (cross < 0 for the exp(+i w t) representative)
    // whirls forward.
    return (cross < 0.0) ? WhirlSense::forward : WhirlSense::backward;
}

} // namespace

ComplexModalModel eigen_general(const SystemMatrices& sys) {
    sys.validate();
    const int n = sys.dof_count();

    Eigen::FullPivLU<Eigen::MatrixXd> m_lu(sys.M);
    if (!m_lu.isInvertible()) throw MatrixError("singular mass matrix");
    const Eigen::MatrixXd m_inv = m_lu.inverse();
    const Eigen::MatrixXd damping = sys.damping_coupling();

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    companion.topRightCorner(n, n).setIdentity();
    companion.bottomLeftCorner(n, n) = -m_inv * sys.K;
    companion.bottomRightCorner(n, n) = -m_inv * damping;

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    if (solver.info() != Eigen::Success) throw MatrixError("state-space eigensolution failed");

    const Eigen::MatrixXcd vectors = solver.eigenvectors();
    const Eigen::VectorXcd values = solver.eigenvalues();

    // Residues of the resolvent: transfer q(s)/F(s) = P (sI - A)^-1 B with
    // P = [I 0], B = [0; M^-1]; mode r contributes theta_r u_r^T / (s - lambda_r)
    // where u_r^T is row r of V^-1 B.
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(2 * n, n);
    b.bottomRows(n) = m_inv.cast<std::complex<double>>();
    const Eigen::MatrixXcd u = vectors.partialPivLu().solve(b); // 2n x n

    std::vector<int> order(2 * n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int c) {
        const double ia = std::abs(values[a].imag());
        const double ic = std::abs(values[c].imag());
        if (std::abs(ia - ic) > 1e-9 * std::max({1.0, ia, ic})) return ia < ic;
        if (values[a].real() != values[c].real()) return values[a].real() < values[c].real();
        return values[a].imag() > values[c].imag();
    });

    ComplexModalModel out;
    out.n = n;
    out.eigenvalues.resize(2 * n);
    out.displacement_modes.resize(n, 2 * n);
    out.residues.reserve(2 * n);
    out.whirl.resize(2 * n);
    for (int r = 0; r < 2 * n; ++r) {
        const int src = order[r];
        out.eigenvalues[r] = values[src];
        out.displacement_modes.col(r) = vectors.col(src).head(n);
        out.residues.push_back(out.displacement_modes.col(r) * u.row(src));
    }

    // Whirl from the +Im representative; conjugate partners share the label.
    for (int r = 0; r < 2 * n; ++r) {
        if (out.eigenvalues[r].imag() >= 0.0) {
            out.whirl[r] = classify_whirl(out.displacement_modes.col(r), sys.lateral_pairs);
        }
    }
    for (int r = 0; r < 2 * n; ++r) {
        if (out.eigenvalues[r].imag() < 0.0) {
            const auto conj_val = std::conj(out.eigenvalues[r]);
            int best = -1;
            double best_dist = std::numeric_limits<double>::infinity();
            for (int s = 0; s < 2 * n; ++s) {
                if (out.eigenvalues[s].imag() < 0.0) continue;
                const double dist = std::abs(out.eigenvalues[s] - conj_val);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = s;
                }
            }
            out.whirl[r] = (best >= 0) ? out.whirl[best]
                                       : classify_whirl(out.displacement_modes.col(r),
                                                        sys.lateral_pairs);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Speed ramp

SpeedRamp::SpeedRamp(std::vector<std::pair<double, double>> breakpoints)
    : points_(std::move(breakpoints)) {
    if (points_.size() < 2) throw DomainError("speed profile needs at least 2 breakpoints");
    if (points_.front().first != 0.0) throw DomainError("speed profile must start at t=0");
    int direction = 0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i].second >= 0.0)) throw DomainError("spin speeds must be >= 0");
        if (i == 0) continue;
        if (!(points_[i].first > points_[i - 1].first)) {
            throw DomainError("speed profile times must be strictly ascending");
        }
        const double dw = points_[i].second - points_[i - 1].second;
        if (dw > 0.0) {
            if (direction < 0) throw DomainError("speed profile must be monotone");
            direction = 1;
        } else if (dw < 0.0) {
            if (direction > 0) throw DomainError("speed profile must be monotone");
            direction = -1;
        }
    }
    angles_.resize(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double dt = points_[i].first - points_[i - 1].first;
        angles_[i] = angles_[i - 1] + 0.5 * (points_[i].second + points_[i - 1].second) * dt;
    }
}

SpeedRamp SpeedRamp::linear(double omega_start, double omega_end, double duration) {
    if (!(duration > 0.0)) throw DomainError("ramp duration must be > 0");
    return SpeedRamp({{0.0, omega_start}, {duration, omega_end}});
}

SpeedRamp SpeedRamp::constant(double omega, double duration) {
    return linear(omega, omega, duration);
}

double SpeedRamp::omega_at(double t) const {
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    const auto hi = static_cast<std::size_t>(it - points_.begin());
    const auto& a = points_[hi - 1];
    const auto& b = points_[hi];
    const double f = (t - a.first) / (b.first - a.first);
    return a.second + f * (b.second - a.second);
}

double SpeedRamp::angle_at(double t) const {
    if (t <= 0.0) return 0.0;
    const double t_end = points_.back().first;
    if (t >= t_end) {
        return angles_.back() + points_.back().second * (t - t_end);
    }
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const auto& p) { return v < p.first; });
    const auto hi = static_cast<std::size_t>(it - points_.begin());
    const auto& a = points_[hi - 1];
    const double w_t = omega_at(t);
    return angles_[hi - 1] + 0.5 * (a.second + w_t) * (t - a.first);
}

Eigen::Vector2d unbalance_force(double mass_ecc, double omega, double theta) {
    const double mag = mass_ecc * omega * omega;
    return {mag * std::cos(theta), mag * std::sin(theta)};
}

// ---------------------------------------------------------------------------
// Newmark-beta integration (average acceleration)

namespace {

constexpr double kBeta = 0.25;
constexpr double kGamma = 0.5;

double max_natural_frequency_hz(const SystemMatrices& sys) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        0.5 * (sys.K + sys.K.transpose()), 0.5 * (sys.M + sys.M.transpose()),
        Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw MatrixError("cannot bound natural frequencies");
    const double w2 = solver.eigenvalues().maxCoeff();
    return std::sqrt(std::max(0.0, w2)) / kTwoPi;
}

void check_step(const SystemMatrices& sys, double dt, double duration) {
    if (!(dt > 0.0)) throw DomainError("dt must be > 0");
    if (!(duration >= 10.0 * dt)) throw DomainError("duration must be at least 10*dt");
    const double f_max = max_natural_frequency_hz(sys);
    if (f_max > 0.0) {
        const double bound = 1.0 / (20.0 * f_max);
        if (dt > bound) {
            throw StabilityError("dt=" + std::to_string(dt) +
                                 " too large for accuracy; need dt <= " + std::to_string(bound));
        }
    }
}

struct NewmarkState {
    Eigen::VectorXd d, v, a;
};

// One implicit step with the coupling matrix evaluated at the new time.
void newmark_step(const Eigen::MatrixXd& m, const Eigen::MatrixXd& damping,
                  const Eigen::PartialPivLU<Eigen::MatrixXd>& keff_lu,
                  const Eigen::VectorXd& f_new, double dt, NewmarkState& s) {
    const double a0 = 1.0 / (kBeta * dt * dt);
    const double a1 = kGamma / (kBeta * dt);
    const double a2 = 1.0 / (kBeta * dt);
    const double a3 = 1.0 / (2.0 * kBeta) - 1.0;
    const double a4 = kGamma / kBeta - 1.0;
    const double a5 = dt * (kGamma / (2.0 * kBeta) - 1.0);

    const Eigen::VectorXd rhs = f_new + m * (a0 * s.d + a2 * s.v + a3 * s.a) +
                                damping * (a1 * s.d + a4 * s.v + a5 * s.a);
    const Eigen::VectorXd d_new = keff_lu.solve(rhs);
    const Eigen::VectorXd a_new = a0 * (d_new - s.d) - a2 * s.v - a3 * s.a;
    const Eigen::VectorXd v_new = s.v + dt * ((1.0 - kGamma) * s.a + kGamma * a_new);
    s.d = d_new;
    s.v = v_new;
    s.a = a_new;
}

} // namespace

MultiChannelRecord simulate_response(const SystemMatrices& sys,
                                     const std::function<Eigen::VectorXd(double)>& forcing,
                                     double dt, double duration) {
    sys.validate();
    check_step(sys, dt, duration);
    const int n = sys.dof_count();
    const auto n_steps = static_cast<std::size_t>(std::floor(duration / dt)) + 1;

    const Eigen::MatrixXd damping = sys.damping_coupling();
    const Eigen::MatrixXd keff = sys.K + (kGamma / (kBeta * dt)) * damping +
                                 (1.0 / (kBeta * dt * dt)) * sys.M;
    Eigen::PartialPivLU<Eigen::MatrixXd> keff_lu(keff);

    Eigen::PartialPivLU<Eigen::MatrixXd> m_lu(sys.M);

    NewmarkState s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    std::vector<std::vector<double>> disp(n), force(n);
    for (int j = 0; j < n; ++j) {
        disp[j].reserve(n_steps);
        force[j].reserve(n_steps);
    }

    Eigen::VectorXd f = forcing(0.0);
    if (f.size() != n) throw DomainError("forcing must return one value per DOF");
    s.a = m_lu.solve(f - damping * s.v - sys.K * s.d);
    for (int j = 0; j < n; ++j) {
        disp[j].push_back(s.d[j]);
        force[j].push_back(f[j]);
    }

    for (std::size_t i = 1; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        f = forcing(t);
        if (f.size() != n) throw DomainError("forcing must return one value per DOF");
        newmark_step(sys.M, damping, keff_lu, f, dt, s);
        for (int j = 0; j < n; ++j) {
            disp[j].push_back(s.d[j]);
            force[j].push_back(f[j]);
        }
    }

    MultiChannelRecord rec;
    rec.sample_rate = 1.0 / dt;
    for (int j = 0; j < n; ++j) {
        const std::string base =
            (j < static_cast<int>(sys.dof_names.size())) ? sys.dof_names[j]
                                                         : "q" + std::to_string(j);
        rec.channels.emplace_back(base, std::move(disp[j]), rec.sample_rate, Unit::m,
                                  Role::vibration);
    }
    for (int j = 0; j < n; ++j) {
        const std::string base =
            (j < static_cast<int>(sys.dof_names.size())) ? sys.dof_names[j]
                                                         : "q" + std::to_string(j);
        rec.channels.emplace_back("f_" + base, std::move(force[j]), rec.sample_rate,
                                  Unit::dimensionless, Role::force);
    }
    rec.validate();
    return rec;
}

MultiChannelRecord simulate_rundown(const SystemMatrices& sys, const JeffcottParams& p,
                                    const SpeedRamp& profile, double dt, double duration) {
    sys.validate();
    p.validate();
    check_step(sys, dt, duration);
    const int n = sys.dof_count();
    if (n < 2) throw DomainError("rundown needs the lateral DOF pair");
    const auto n_steps = static_cast<std::size_t>(std::floor(duration / dt)) + 1;

    NewmarkState s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
    Eigen::PartialPivLU<Eigen::MatrixXd> m_lu(sys.M);

    auto force_at = [&](double t) {
        Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
        const auto fyz = unbalance_force(p.unbalance_mass_ecc, profile.omega_at(t),
                                         profile.angle_at(t));
        f[0] = fyz[0];
        f[1] = fyz[1];
        return f;
    };

    std::vector<double> y, z, tacho;
    y.reserve(n_steps);
    z.reserve(n_steps);
    tacho.reserve(n_steps);
    auto emit = [&](double t) {
        y.push_back(s.d[0]);
        z.push_back(s.d[1]);
        const double revs = profile.angle_at(t) / kTwoPi;
        const double frac = revs - std::floor(revs);
        tacho.push_back(frac < 0.05 ? 5.0 : 0.0);
    };

    Eigen::VectorXd f = force_at(0.0);
    s.a = m_lu.solve(f - (sys.C + profile.omega_at(0.0) * sys.G) * s.v - sys.K * s.d);
    emit(0.0);

    for (std::size_t i = 1; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        // Gyroscopic coupling follows the instantaneous spin speed.
        const Eigen::MatrixXd damping = sys.C + profile.omega_at(t) * sys.G;
        const Eigen::MatrixXd keff = sys.K + (kGamma / (kBeta * dt)) * damping +
                                     (1.0 / (kBeta * dt * dt)) * sys.M;
        Eigen::PartialPivLU<Eigen::MatrixXd> keff_lu(keff);
        newmark_step(sys.M, damping, keff_lu, force_at(t), dt, s);
        emit(t);
    }

    MultiChannelRecord rec;
    rec.sample_rate = 1.0 / dt;
    rec.channels.emplace_back("y", std::move(y), rec.sample_rate, Unit::m, Role::vibration);
    rec.channels.emplace_back("z", std::move(z), rec.sample_rate, Unit::m, Role::vibration);
    rec.channels.emplace_back("tacho", std::move(tacho), rec.sample_rate, Unit::dimensionless,
                              Role::tacho);
    rec.validate();
    return rec;
}

// ---------------------------------------------------------------------------
// JSON export

std::string to_json(const ModalModel& m) {
    nlohmann::json doc;
    doc["version"] = 1;
    doc["kind"] = "modal_symmetric";
    doc["n_modes"] = m.n_modes;
    doc["n"] = m.phi.rows();
    doc["non_proportionality"] = m.non_proportionality;
    auto& modes = doc["modes"];
    modes = nlohmann::json::array();
    for (int r = 0; r < m.n_modes; ++r) {
        nlohmann::json mode;
        mode["omega_r_rad_s"] = m.omega_r[r];
        mode["zeta_r"] = m.zeta_r[r];
        mode["modal_mass"] = m.modal_mass[r];
        auto& phi = mode["phi"];
        phi = nlohmann::json::array();
        for (int j = 0; j < m.phi.rows(); ++j) phi.push_back(m.phi(j, r));
        modes.push_back(std::move(mode));
    }
    return doc.dump(2) + "\n";
}

std::string to_json(const ComplexModalModel& m) {
    nlohmann::json doc;
    doc["version"] = 1;
    doc["kind"] = "modal_general";
    doc["n_modes"] = 2 * m.n;
    doc["n"] = m.n;
    auto& modes = doc["modes"];
    modes = nlohmann::json::array();
    for (int r = 0; r < 2 * m.n; ++r) {
        nlohmann::json mode;
        mode["lambda_re"] = m.eigenvalues[r].real();
        mode["lambda_im"] = m.eigenvalues[r].imag();
        mode["whirl"] = to_string(m.whirl[r]);
        nlohmann::json res_re = nlohmann::json::array();
        nlohmann::json res_im = nlohmann::json::array();
        for (int j = 0; j < m.n; ++j) {
            nlohmann::json row_re = nlohmann::json::array();
            nlohmann::json row_im = nlohmann::json::array();
            for (int k = 0; k < m.n; ++k) {
                row_re.push_back(m.residues[r](j, k).real());
                row_im.push_back(m.residues[r](j, k).imag());
            }
            res_re.push_back(std::move(row_re));
            res_im.push_back(std::move(row_im));
        }
        mode["residues_re"] = std::move(res_re);
        mode["residues_im"] = std::move(res_im);
        modes.push_back(std::move(mode));
    }
    return doc.dump(2) + "\n";
}

ModalModel modal_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("modal JSON: ") + e.what());
    }
    try {
        if (doc.at("version").get<int>() != 1) throw FormatError("unsupported modal version");
        if (doc.at("kind").get<std::string>() != "modal_symmetric") {
            throw FormatError("expected a modal_symmetric document");
        }
        ModalModel m;
        m.n_modes = doc.at("n_modes").get<int>();
        const int n = doc.at("n").get<int>();
        if (m.n_modes < 0 || n <= 0) throw FormatError("invalid modal dimensions");
        m.phi.resize(n, m.n_modes);
        for (const auto& mode : doc.at("modes")) {
            const int r = static_cast<int>(m.omega_r.size());
            if (r >= m.n_modes) throw FormatError("more modes than n_modes");
            m.omega_r.push_back(mode.at("omega_r_rad_s").get<double>());
            m.zeta_r.push_back(mode.at("zeta_r").get<double>());
            m.modal_mass.push_back(mode.at("modal_mass").get<double>());
            const auto& phi = mode.at("phi");
            if (static_cast<int>(phi.size()) != n) throw FormatError("phi length != n");
            for (int j = 0; j < n; ++j) m.phi(j, r) = phi[j].get<double>();
        }
        if (static_cast<int>(m.omega_r.size()) != m.n_modes) {
            throw FormatError("mode count mismatch");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("modal JSON: ") + e.what());
    }
}

} // namespace rotordiag
