#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/FFT>
#include <cmath>

#include "convamp/ampsim.hpp"
#include "convamp/errors.hpp"

using namespace convamp;

namespace {

ScalarCoeffs stable_coeffs() {
    ScalarCoeffs co;
    co.a = Complex(1, 1);
    co.b = Complex(1, 0);
    co.c = Complex(-3, 2);
    co.d = Complex(-1, 2.0 / 3);
    co.f = 1;
    co.h = 2;
    co.eB = 0;
    return co;
}

FieldState exponential_state(const ScalarCoeffs& co, Real kappa, Real eps, int N,
                             int periods = 1) {
    WaveParams w = wave_family(co, kappa, 0.0);
    FieldState st;
    st.points = N;
    st.eps = eps;
    st.length = kappa != 0 ? 2 * M_PI * periods / std::abs(kappa) : 2 * M_PI * periods;
    st.A.resize(N);
    st.B = Vec::Zero(N);
    for (int i = 0; i < N; ++i)
        st.A(i) = w.alpha * std::exp(I * kappa * (st.length * i / N));
    return st;
}

Real rel_wave_error(const FieldState& st, const ScalarCoeffs& co, Real kappa) {
    WaveParams w = wave_family(co, kappa, 0.0);
    Real worst = 0;
    for (int i = 0; i < st.points; ++i) {
        const Real x = st.length * i / st.points;
        const Complex exact = w.alpha * std::exp(I * (kappa * x - w.omega * st.time));
        worst = std::max(worst, std::abs(st.A(i) - exact) / w.alpha);
    }
    return worst;
}

} // namespace

TEST_CASE("exponential solutions are preserved to scheme accuracy") {
    ScalarCoeffs co = stable_coeffs();
    const Real eps = 1e-2, kappa = 0.25;
    FieldState st = exponential_state(co, kappa, eps, 128);
    TrajectorySummary tr = simulate(st, co, 1.0, 1e-3, 100);
    CHECK(rel_wave_error(tr.final_state, co, kappa) < 1e-6);
    // B stays identically zero for the exponential wave
    CHECK(tr.final_state.B.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pure advection-diffusion of the mean mode matches the closed form") {
    ScalarCoeffs co = stable_coeffs();
    co.d = Complex(0, 0);
    co.h = 0;
    co.g = Complex(0, 0);
    co.eB = 0.4;
    const Real eps = 0.05, L = 2 * M_PI;
    FieldState st;
    st.points = 128;
    st.eps = eps;
    st.length = L;
    st.A = VecC::Zero(128);
    st.B.resize(128);
    for (int i = 0; i < 128; ++i) st.B(i) = std::sin(2 * M_PI * i / 128.0);
    const Real T = 0.3;
    TrajectorySummary tr = simulate(st, co, T, 1e-3, 1000);
    // B(x,T) = exp(-eB k^2 T) sin(k (x + f T / eps)), k = 2 pi / L = 1
    Real worst = 0;
    for (int i = 0; i < 128; ++i) {
        const Real x = L * i / 128.0;
        const Real exact = std::exp(-co.eB * T) * std::sin(x + co.f * T / eps);
        worst = std::max(worst, std::abs(tr.final_state.B(i) - exact));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("mass of the mean mode is conserved over many steps") {
    ScalarCoeffs co = stable_coeffs();
    co.g = Complex(0.3, -0.2);
    co.eB = 0.1;
    FieldState st = exponential_state(co, 0.2, 1e-2, 128);
    for (int i = 0; i < 128; ++i) st.B(i) = 0.05 * std::cos(2 * M_PI * i / 128.0);
    const Real mass0 = energy(st).mass_B;
    FieldState cur = st;
    for (int i = 0; i < 10000; ++i) cur = step(cur, co, 1e-4);
    CHECK(std::abs(energy(cur).mass_B - mass0) < 1e-12);
}

TEST_CASE("temporal self-convergence of the stepper is at least second order") {
    ScalarCoeffs co = stable_coeffs();
    const Real eps = 0.02, kappa = 0.25;
    FieldState st = exponential_state(co, kappa, eps, 128);
    // perturb so the nonlinear terms are genuinely exercised
    for (int i = 0; i < st.points; ++i) {
        const Real x = st.length * i / st.points;
        st.A(i) += 0.01 * std::cos(2 * kappa * x);
        st.B(i) = 0.01 * std::sin(2 * kappa * x);
    }
    const Real T = 0.25;
    auto run = [&](Real dt) {
        TrajectorySummary tr = simulate(st, co, T, dt, 1 << 20);
        return tr.final_state;
    };
    FieldState f1 = run(4e-3), f2 = run(2e-3), f4 = run(1e-3);
    const Real e1 = (f1.A - f4.A).norm() + (f1.B - f4.B).norm();
    const Real e2 = (f2.A - f4.A).norm() + (f2.B - f4.B).norm();
    const Real order = std::log2(e1 / e2) - 0.0;
    // e(dt) ~ C dt^p with Richardson against the fine solution: observed
    // ratio ~ (2^p - ...), demand p >= 2 up to a modest margin
    CHECK(order >= 1.9);
}

TEST_CASE("doubling the spatial resolution leaves smooth solutions unchanged") {
    ScalarCoeffs co = stable_coeffs();
    const Real eps = 0.02, kappa = 0.25;
    FieldState st128 = exponential_state(co, kappa, eps, 128);
    FieldState st256 = exponential_state(co, kappa, eps, 256);
    for (int i = 0; i < st128.points; ++i) {
        const Real x = st128.length * i / st128.points;
        st128.A(i) += 0.01 * std::exp(I * 2 * kappa * x);
        st128.B(i) = 0.01 * std::sin(2 * kappa * x);
    }
    for (int i = 0; i < st256.points; ++i) {
        const Real x = st256.length * i / st256.points;
        st256.A(i) += 0.01 * std::exp(I * 2 * kappa * x);
        st256.B(i) = 0.01 * std::sin(2 * kappa * x);
    }
    FieldState f1 = simulate(st128, co, 0.1, 5e-4, 1 << 20).final_state;
    FieldState f2 = simulate(st256, co, 0.1, 5e-4, 1 << 20).final_state;
    Real worst = 0;
    for (int i = 0; i < 128; ++i) {
        worst = std::max(worst, std::abs(f1.A(i) - f2.A(2 * i)));
        worst = std::max(worst, std::abs(f1.B(i) - f2.B(2 * i)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("phase invariance of the evolution") {
    ScalarCoeffs co = stable_coeffs();
    FieldState st = exponential_state(co, 0.25, 0.02, 128);
    for (int i = 0; i < st.points; ++i)
        st.B(i) = 0.02 * std::sin(2 * M_PI * i / st.points);
    const Complex chi = std::exp(I * 0.9);
    FieldState st2 = st;
    st2.A *= chi;
    FieldState f1 = simulate(st, co, 0.2, 1e-3, 1 << 20).final_state;
    FieldState f2 = simulate(st2, co, 0.2, 1e-3, 1 << 20).final_state;
    CHECK((f2.A - chi * f1.A).norm() < 1e-10 * f1.A.norm());
    CHECK((f2.B - f1.B).norm() < 1e-10);
}

TEST_CASE("pure factorization: the singular advection is an exact shift") {
    // h = 0, d = 0: the mean mode advects independently; the f != 0 solution
    // equals the f = 0 solution composed with X -> X + f T / eps
    ScalarCoeffs co = stable_coeffs();
    co.d = Complex(0, 0);
    co.h = 0;
    co.g = Complex(0, 0);
    co.eB = 0.2;
    FieldState st = exponential_state(co, 0.0, 0.05, 128);
    for (int i = 0; i < st.points; ++i)
        st.B(i) = 0.3 * std::sin(2 * M_PI * i / st.points)
                  + 0.1 * std::cos(4 * M_PI * i / st.points);
    st.model = StabilityModel::Hyperbolic;
    const Real T = 0.35;
    FieldState with_f = simulate(st, co, T, 1e-3, 1 << 20).final_state;
    ScalarCoeffs co0 = co;
    co0.f = 0;
    FieldState no_f = simulate(st, co0, T, 1e-3, 1 << 20).final_state;
    // compare in Fourier space: the shift rotates mode k by e^{i k f T / eps}
    const Real shift = co.f * T / st.eps;
    Real worst = 0;
    Eigen::FFT<Real> fft;
    VecC bw(st.points), bn(st.points);
    {
        VecC tmp = with_f.B.cast<Complex>(), out(st.points);
        fft.fwd(out, tmp);
        bw = out;
        tmp = no_f.B.cast<Complex>();
        fft.fwd(out, tmp);
        bn = out;
    }
    for (int j = 0; j < st.points; ++j) {
        const int jj = j <= st.points / 2 ? j : j - st.points;
        const Real k = 2 * M_PI * jj / st.length;
        worst = std::max(worst, std::abs(bw(j) - bn(j) * std::exp(I * k * shift))
                                    / st.points);
    }
    CHECK(worst < 1e-10);
    // and the A field is identical in the two runs
    CHECK((with_f.A - no_f.A).norm() < 1e-10);
}

TEST_CASE("energy monitor on the rescaled hyperbolic model") {
    // b = d = f = h = 1, Re a = 1; amplitude-time horizon T = 1 corresponds
    // to fast time 1/eps
    ScalarCoeffs co;
    co.a = Complex(1, 1);
    co.b = Complex(1, 0);
    co.c = Complex(-1, 1);
    co.d = Complex(1, 0);
    co.f = 1;
    co.h = 1;
    co.eB = 0;
    const Real eps = 0.05;
    FieldState st;
    st.points = 256;
    st.eps = eps;
    st.length = 8 * M_PI;
    st.model = StabilityModel::Hyperbolic;
    st.A.resize(st.points);
    st.B.resize(st.points);
    for (int i = 0; i < st.points; ++i) {
        const Real x = st.length * i / st.points;
        st.A(i) = Complex(std::sin(2 * M_PI * x / st.length),
                          0.3 * std::cos(4 * M_PI * x / st.length));
        st.B(i) = 0.2 * std::cos(2 * M_PI * x / st.length);
    }
    // scale the data so E(0) = M / 2 = 0.5
    const Real M = 1.0;
    Real e0 = energy(st).E;
    const Real scale = std::sqrt(0.5 * M / e0);
    st.A *= scale;
    st.B *= scale * scale;  // keep B + |A|^2 balanced in scale
    e0 = energy(st).E;
    // nudge to the target with a few fixed-point rescalings of A only
    for (int it = 0; it < 40 && std::abs(e0 - 0.5 * M) > 1e-12; ++it) {
        st.A *= std::sqrt(0.5 * M / e0);
        e0 = energy(st).E;
    }
    REQUIRE(std::abs(e0 - 0.5 * M) < 1e-6);

    Real emax = 0;
    simulate(st, co, 1.0, 5e-4, 20, [&](const FieldState& s) {
        emax = std::max(emax, energy(s).E);
    });
    CHECK(emax <= M);
}

TEST_CASE("Darcy run: constant-modulus data keeps B0 and B constant") {
    ScalarCoeffs co = stable_coeffs();
    const int N = 128;
    const Real L = 2 * M_PI / 0.25;
    VecC A0(N);
    WaveParams w = wave_family(co, 0.25, 0.0);
    for (int i = 0; i < N; ++i) A0(i) = w.alpha * std::exp(I * 0.25 * (L * i / N));
    DarcyTrajectory tr = darcy_run(co, A0, L, 0.1, 1e-2, 0.5, 1e-3);
    for (Real b0 : tr.B0_series) CHECK(std::abs(b0 - 0.1) < 1e-9);
    for (size_t i = 1; i < tr.massB_series.size(); ++i)
        CHECK(std::abs(tr.massB_series[i] - tr.massB_series[0]) < 1e-10);
}

TEST_CASE("Darcy run: localized data on a large torus pins B0") {
    ScalarCoeffs co = stable_coeffs();
    co.b = Complex(0.05, 0);  // weak growth, small data
    const int N = 512;
    const Real support = 2.0, L = 40 * support * 2;
    VecC A0(N);
    for (int i = 0; i < N; ++i) {
        const Real x = L * i / N - L / 2;
        A0(i) = 1e-3 * std::exp(-x * x / (support * support));
    }
    DarcyTrajectory tr = darcy_run(co, A0, L, 0.0, 1e-2, 0.1, 1e-3);
    Real drift = 0;
    for (Real b0 : tr.B0_series) drift = std::max(drift, std::abs(b0));
    CHECK(drift < 1e-8);
    for (size_t i = 1; i < tr.massB_series.size(); ++i)
        CHECK(std::abs(tr.massB_series[i] - tr.massB_series[0]) < 1e-10);
}

TEST_CASE("blowup and dt-bound guards") {
    ScalarCoeffs co = stable_coeffs();
    co.c = Complex(+3, 0);  // focusing: finite-time blowup
    co.b = Complex(5, 0);
    FieldState st = exponential_state(stable_coeffs(), 0.0, 0.05, 64);
    st.A *= 50.0;
    CHECK_THROWS_AS(simulate(st, co, 50.0, 0.05, 1), NumericalError);

    StepOptions opt;
    opt.exact_forcing = false;
    ScalarCoeffs co2 = stable_coeffs();
    FieldState st2 = exponential_state(co2, 0.25, 1e-3, 64);
    // dt above 0.5 eps dx / |h|: rejected in the explicit-forcing mode
    CHECK_THROWS_AS(step(st2, co2, 1e-2, opt), InputError);
}
