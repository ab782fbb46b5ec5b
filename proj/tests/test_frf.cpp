// Copyright (c) 2026 rotordiag contributors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#define ROTORDIAG_TEST_NEED_SYSTEMS
#include <cmath>
#include <random>

#include "rotordiag/frf.hpp"
#include "test_util.hpp"

using namespace rotordiag;
using testutil::kPi;

namespace {

SystemMatrices sdof(double m, double k, double zeta) {
    SystemMatrices sys;
    sys.M = Eigen::MatrixXd::Constant(1, 1, m);
    sys.K = Eigen::MatrixXd::Constant(1, 1, k);
    sys.C = Eigen::MatrixXd::Constant(1, 1, 2.0 * zeta * std::sqrt(k * m));
    sys.G = Eigen::MatrixXd::Zero(1, 1);
    return sys;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

double rel_dev(std::complex<double> a, std::complex<double> b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return (scale == 0.0) ? 0.0 : std::abs(a - b) / scale;
}

ModalModel truncate_modes(const ModalModel& m, int keep) {
    ModalModel out = m;
    out.n_modes = keep;
    out.omega_r.resize(keep);
    out.zeta_r.resize(keep);
    out.modal_mass.resize(keep);
    out.phi = m.phi.leftCols(keep).eval();
    return out;
}

JeffcottParams gyro_params() {
    JeffcottParams p;
    p.disc_mass = 10.0;
    p.shaft_stiffness = 1e6;
    p.diametral_inertia = 0.05;
    p.polar_inertia = 0.08;
    p.damping_ratio = 0.01;
    return p;
}

} // namespace

TEST_CASE("static receptance of an SDOF equals the compliance 1/k") {
    auto modal = eigen_symmetric(sdof(1.0, 3947.84, 0.0));
    const auto a0 = receptance_symmetric(modal, 0.0, 0, 0);
    CHECK(a0.real() == doctest::Approx(1.0 / 3947.84).epsilon(1e-12));
    CHECK(a0.real() == doctest::Approx(2.53303e-4).epsilon(1e-5));
    CHECK(a0.imag() == doctest::Approx(0.0));
}

TEST_CASE("resonant receptance magnitude is 1/(2 zeta k) at -90 degrees") {
    const double k = 3947.84;
    const double zeta = 0.05;
    auto modal = eigen_symmetric(sdof(1.0, k, zeta));
    const double w1 = modal.omega_r[0];
    const auto a = receptance_symmetric(modal, w1, 0, 0);
    CHECK(std::abs(a) == doctest::Approx(1.0 / (2.0 * zeta * k)).epsilon(1e-9));
    CHECK(std::abs(a) == doctest::Approx(2.53303e-3).epsilon(1e-5));
    CHECK(std::arg(a) == doctest::Approx(-kPi / 2.0).epsilon(1e-9));
}

TEST_CASE("a coordinate on every node has zero receptance") {
    ModalModel m;
    m.n_modes = 2;
    m.omega_r = {40.0, 90.0};
    m.zeta_r = {0.02, 0.05};
    m.modal_mass = {1.0, 1.0};
    m.phi.resize(3, 2);
    m.phi << 1.0, 0.8, 0.0, 0.0, 0.6, -1.0; // coordinate 1 is a node of both modes
    for (double w : {0.0, 20.0, 40.0, 90.0, 200.0}) {
        CHECK(std::abs(receptance_symmetric(m, w, 1, 1)) == 0.0);
    }
}

TEST_CASE("receptance index checking") {
    auto modal = eigen_symmetric(sdof(1.0, 100.0, 0.01));
    CHECK_THROWS_AS(receptance_symmetric(modal, 1.0, 1, 0), IndexError);
    CHECK_THROWS_AS(receptance_symmetric(modal, 1.0, 0, -1), IndexError);
}

TEST_CASE("direct receptance at zero frequency is the static flexibility") {
    std::mt19937 rng(31);
    auto sys = testutil::random_symmetric_system(rng, 4);
    const Eigen::MatrixXcd a0 = receptance_direct(sys, 0.0);
    const Eigen::MatrixXd kinv = sys.K.inverse();
    CHECK((a0.real() - kinv).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(a0.imag().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("direct receptance of a symmetric system is symmetric") {
    std::mt19937 rng(32);
    auto sys = testutil::random_symmetric_system(rng, 5);
    const auto a = receptance_direct(sys, 25.0);
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("direct receptance reports the singular frequency of an undamped hit") {
    auto sys = sdof(1.0, 3947.84, 0.0);
    const double w1 = std::sqrt(3947.84);
    CHECK_THROWS_AS(receptance_direct(sys, w1), SingularityError);
    const auto res = receptance_direct(sys, w1 * 1.01); // nearby is fine
    CHECK(std::isfinite(res(0, 0).real()));
}

TEST_CASE("modal superposition matches direct inversion on random symmetric systems") {
    std::mt19937 rng(101);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        auto sys = testutil::random_symmetric_system(rng, n);
        auto modal = eigen_symmetric(sys);
        const double w_max = modal.omega_r.back();
        std::uniform_real_distribution<double> freq(0.0, 1.5 * w_max);
        std::uniform_int_distribution<int> coord(0, n - 1);
        for (int i = 0; i < 200; ++i) {
            const double w = freq(rng);
            const int j = coord(rng);
            const int k = coord(rng);
            const auto direct = receptance_direct(sys, w)(j, k);
            const auto modal_val = receptance_symmetric(modal, w, j, k);
            CHECK(rel_dev(modal_val, direct) < 1e-8);
        }
    }
}

TEST_CASE("complex-mode superposition matches direct inversion on gyroscopic systems") {
    std::mt19937 rng(202);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);
        auto sys = testutil::random_gyro_system(rng, n);
        auto cm = eigen_general(sys);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.K, sys.M,
                                                                      Eigen::EigenvaluesOnly);
        const double w_max = std::sqrt(es.eigenvalues().maxCoeff());
        std::uniform_real_distribution<double> freq(0.0, 1.5 * w_max);
        std::uniform_int_distribution<int> coord(0, n - 1);
        for (int i = 0; i < 200; ++i) {
            const double w = freq(rng);
            const int j = coord(rng);
            const int k = coord(rng);
            const auto direct = receptance_direct(sys, w)(j, k);
            const auto modal_val = receptance_general(cm, w, j, k);
            CHECK(rel_dev(modal_val, direct) < 1e-8);
        }
    }
}

TEST_CASE("general path reduces to the symmetric path at zero spin") {
    std::mt19937 rng(303);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        auto sys = testutil::random_symmetric_system(rng, n);
        auto modal = eigen_symmetric(sys);
        auto cm = eigen_general(sys);
        auto grid = linspace(0.0, 2.0 * modal.omega_r.back(), 120);
        for (int j = 0; j < n; ++j) {
            auto sym = frf_curve_symmetric(modal, grid, j, 0);
            auto gen = frf_curve_general(cm, grid, j, 0);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                CHECK(rel_dev(sym.values[i], gen.values[i]) < 1e-8);
            }
        }
    }
}

TEST_CASE("spinning Jeffcott shows split tilt peaks at the complex eigenfrequencies") {
    auto p = gyro_params();
    auto sys = build_jeffcott(p);
    sys.omega_spin = 800.0;
    auto cm = eigen_general(sys);

    std::vector<double> tilt_freqs;
    for (int r = 0; r < 2 * sys.dof_count(); ++r) {
        if (cm.eigenvalues[r].imag() <= 0.0) continue;
        const auto shape = cm.displacement_modes.col(r);
        if (std::norm(shape[2]) + std::norm(shape[3]) >
            10.0 * (std::norm(shape[0]) + std::norm(shape[1]))) {
            tilt_freqs.push_back(cm.eigenvalues[r].imag());
        }
    }
    REQUIRE(tilt_freqs.size() == 2);
    std::sort(tilt_freqs.begin(), tilt_freqs.end());

    const double step = 2.0;
    auto grid = linspace(1200.0, 4200.0, static_cast<std::size_t>((4200.0 - 1200.0) / step) + 1);
    auto curve = frf_curve_general(cm, grid, 2, 2);
    std::vector<double> peak_freqs;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double m0 = std::abs(curve.values[i - 1]);
        const double m1 = std::abs(curve.values[i]);
        const double m2 = std::abs(curve.values[i + 1]);
        if (m1 > m0 && m1 > m2) peak_freqs.push_back(grid[i]);
    }
    REQUIRE(peak_freqs.size() == 2);
    CHECK(std::abs(peak_freqs[0] - tilt_freqs[0]) <= step);
    CHECK(std::abs(peak_freqs[1] - tilt_freqs[1]) <= step);
}

TEST_CASE("reciprocity holds symmetric and breaks for gyroscopic cross terms") {
    std::mt19937 rng(404);
    auto sym = testutil::random_symmetric_system(rng, 4);
    auto modal = eigen_symmetric(sym);
    for (double w : {5.0, 40.0, 111.0}) {
        for (int j = 0; j < 4; ++j) {
            for (int k = 0; k < 4; ++k) {
                CHECK(rel_dev(receptance_symmetric(modal, w, j, k),
                              receptance_symmetric(modal, w, k, j)) < 1e-10);
            }
        }
    }

    auto p = gyro_params();
    auto gyro = build_jeffcott(p);
    gyro.omega_spin = 800.0;
    double max_alpha = 0.0, max_asym = 0.0;
    for (double w : linspace(1500.0, 4000.0, 200)) {
        const auto a = receptance_direct(gyro, w);
        max_alpha = std::max(max_alpha, a.cwiseAbs().maxCoeff());
        max_asym = std::max(max_asym, (a - a.transpose()).cwiseAbs().maxCoeff());
    }
    CHECK(max_asym > 1e-3 * max_alpha);
}

TEST_CASE("adding modes never increases the truncation error") {
    std::mt19937 rng(505);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 3);
        auto sys = testutil::random_symmetric_system(rng, n);
        auto modal = eigen_symmetric(sys);
        auto grid = linspace(0.0, 1.2 * modal.omega_r.back(), 150);
        auto direct = frf_curve_direct(sys, grid, 0, 0);
        double prev_err = std::numeric_limits<double>::infinity();
        for (int keep = 1; keep <= n; ++keep) {
            auto truncated = truncate_modes(modal, keep);
            auto approx = frf_curve_symmetric(truncated, grid, 0, 0);
            double err = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                err = std::max(err, std::abs(approx.values[i] - direct.values[i]));
            }
            CHECK(err <= prev_err * (1.0 + 1e-9));
            prev_err = err;
        }
    }
}

TEST_CASE("full modal sets recover the static flexibility at zero frequency") {
    std::mt19937 rng(606);
    auto sys = testutil::random_symmetric_system(rng, 5);
    auto modal = eigen_symmetric(sys);
    const Eigen::MatrixXd kinv = sys.K.inverse();
    for (int j = 0; j < 5; ++j) {
        for (int k = 0; k < 5; ++k) {
            const auto a = receptance_symmetric(modal, 0.0, j, k);
            CHECK(std::abs(a - std::complex<double>(kinv(j, k), 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("H1 of a proportional response is the gain with unit coherence") {
    std::mt19937 rng(17);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> f(4096);
    for (auto& v : f) v = dist(rng);
    std::vector<double> y = f;
    for (auto& v : y) v *= 2.0;
    auto force = testutil::make_channel("f", f, 1024.0, Unit::dimensionless, Role::force);
    auto resp = testutil::make_channel("y", y, 1024.0, Unit::m);
    auto est = estimate_frf_h1(force, resp, 8, 0.5);
    for (std::size_t b = 1; b < est.frf.values.size(); ++b) {
        CHECK(std::abs(est.frf.values[b] - std::complex<double>(2.0, 0.0)) < 1e-9);
        CHECK(est.coherence[b] > 1.0 - 1e-9);
    }
}

TEST_CASE("H1 coherence collapses for independent noise") {
    std::mt19937 rng_a(1), rng_b(2);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> f(16384), y(16384);
    for (auto& v : f) v = dist(rng_a);
    for (auto& v : y) v = dist(rng_b);
    auto force = testutil::make_channel("f", f, 1024.0, Unit::dimensionless, Role::force);
    auto resp = testutil::make_channel("y", y, 1024.0, Unit::m);
    auto est = estimate_frf_h1(force, resp, 16, 0.0);
    std::size_t below = 0;
    for (double c : est.coherence) {
        if (c < 0.2) ++below;
    }
    CHECK(static_cast<double>(below) / est.coherence.size() > 0.8);
}

TEST_CASE("H1 on a simulated SDOF matches the direct receptance near resonance") {
    const double f1 = 10.0;
    const double k = std::pow(2.0 * kPi * f1, 2.0);
    const double zeta = 0.05;
    auto sys = sdof(1.0, k, zeta);

    const double fs = 256.0;
    const double dt = 1.0 / fs;
    std::mt19937 rng(99);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double sim_time = 130.0;
    const std::size_t n_steps = static_cast<std::size_t>(sim_time * fs) + 1;
    std::vector<double> force_samples(n_steps);
    for (auto& v : force_samples) v = dist(rng);
    auto forcing = [&](double t) {
        auto idx = std::min<std::size_t>(n_steps - 1,
                                         static_cast<std::size_t>(std::llround(t * fs)));
        return Eigen::VectorXd::Constant(1, force_samples[idx]);
    };
    auto rec = simulate_response(sys, forcing, dt, sim_time);

    // Drop the start-up transient before estimating.
    const std::size_t skip = static_cast<std::size_t>(10.0 * fs);
    std::vector<double> f_tail(rec.channels[1].samples.begin() + skip,
                               rec.channels[1].samples.end());
    std::vector<double> y_tail(rec.channels[0].samples.begin() + skip,
                               rec.channels[0].samples.end());
    auto force = testutil::make_channel("f", f_tail, fs, Unit::dimensionless, Role::force);
    auto resp = testutil::make_channel("y", y_tail, fs, Unit::m);

    auto est = estimate_frf_h1(force, resp, 16, 0.5);
    for (std::size_t b = 0; b < est.frf.frequencies.size(); ++b) {
        const double w = est.frf.frequencies[b];
        const double f_hz = w / (2.0 * kPi);
        if (f_hz < 8.0 || f_hz > 12.0) continue;
        const auto exact = receptance_direct(sys, w)(0, 0);
        CHECK(std::abs(est.frf.values[b]) ==
              doctest::Approx(std::abs(exact)).epsilon(0.05));
        CHECK(est.coherence[b] > 0.99);
    }
}

TEST_CASE("H1 needs enough samples for the requested averages") {
    auto force = testutil::make_channel("f", std::vector<double>(100, 1.0), 100.0,
                                        Unit::dimensionless, Role::force);
    auto resp = testutil::make_channel("y", std::vector<double>(100, 1.0), 100.0, Unit::m);
    CHECK_THROWS_AS(estimate_frf_h1(force, resp, 32, 0.0), LengthError);
    CHECK_THROWS_AS(estimate_frf_h1(force, resp, 1, 0.0), DomainError);
}

TEST_CASE("peak picking recovers two separated modes") {
    ModalModel m;
    m.n_modes = 2;
    m.omega_r = {40.0, 90.0};
    m.zeta_r = {0.02, 0.05};
    m.modal_mass = {1.0, 1.0};
    m.phi.resize(2, 2);
    m.phi << 1.0, 0.8, 0.6, -1.0;
    const double step = 0.2;
    auto grid = linspace(1.0, 130.0, static_cast<std::size_t>((130.0 - 1.0) / step) + 1);
    auto curve = frf_curve_symmetric(m, grid, 0, 0);
    auto peaks = peak_pick_modal(curve);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0].omega - 40.0 * std::sqrt(1.0 - 2.0 * 0.02 * 0.02)) <= 2.0 * step);
    CHECK(std::abs(peaks[1].omega - 90.0 * std::sqrt(1.0 - 2.0 * 0.05 * 0.05)) <= 2.0 * step);
    REQUIRE(peaks[0].zeta_valid);
    REQUIRE(peaks[1].zeta_valid);
    CHECK(peaks[0].zeta == doctest::Approx(0.02).epsilon(0.15));
    CHECK(peaks[1].zeta == doctest::Approx(0.05).epsilon(0.15));
}

TEST_CASE("peak picking returns nothing on a flat curve") {
    FrfCurve curve;
    curve.frequencies = linspace(1.0, 100.0, 100);
    curve.values.assign(100, {1.0, 0.0});
    curve.j = curve.k = 0;
    curve.method = FrfMethod::direct;
    CHECK(peak_pick_modal(curve).empty());
}

TEST_CASE("a finer grid sharpens the light-damping estimate") {
    ModalModel m;
    m.n_modes = 1;
    m.omega_r = {50.0};
    m.zeta_r = {0.01};
    m.modal_mass = {1.0};
    m.phi.resize(1, 1);
    m.phi << 1.0;
    const double step = 0.05; // ten times finer than the half-power width/2
    auto grid = linspace(30.0, 70.0, static_cast<std::size_t>(40.0 / step) + 1);
    auto curve = frf_curve_symmetric(m, grid, 0, 0);
    auto peaks = peak_pick_modal(curve);
    REQUIRE(peaks.size() == 1);
    REQUIRE(peaks[0].zeta_valid);
    CHECK(peaks[0].zeta == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("frf csv export carries the sidecar metadata") {
    auto modal = eigen_symmetric(sdof(1.0, 100.0, 0.05));
    auto grid = linspace(0.0, 20.0, 21);
    auto curve = frf_curve_symmetric(modal, grid, 0, 0);
    CHECK(to_csv(curve).rfind("frequency_rad_s,real,imag,magnitude,phase_rad\n", 0) == 0);
    auto sidecar = sidecar_json(curve);
    CHECK(sidecar.find("\"method\": \"modal_symmetric\"") != std::string::npos);
}
