#include "convamp/ampsim.hpp"

#include <unsupported/Eigen/FFT>
#include <cmath>

#include "convamp/amplitude.hpp"
#include "convamp/errors.hpp"

namespace convamp {

namespace {

Complex phi1(Complex z) {
    if (std::abs(z) < 1e-4) return 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    return (std::exp(z) - 1.0) / z;
}

struct SpectralWorkspace {
    int N;
    Real L;
    std::vector<Real> k;        // FFT-ordered wavenumbers
    std::vector<bool> keep;     // 2/3-rule mask
    Eigen::FFT<Real> fft;

    SpectralWorkspace(int n, Real length) : N(n), L(length), k(n), keep(n) {
        for (int j = 0; j < N; ++j) {
            const int jj = j <= N / 2 ? j : j - N;
            k[j] = 2 * M_PI * jj / L;
            keep[j] = std::abs(jj) <= N / 3;
        }
    }

    VecC fwd(const VecC& f) {
        VecC out(N);
        fft.fwd(out, f);
        return out / Real(N);
    }
    VecC inv(const VecC& fh) {
        VecC in = fh * Real(N), out(N);
        fft.inv(out, in);
        return out;
    }
    VecC dx(const VecC& f) {
        VecC fh = fwd(f);
        for (int j = 0; j < N; ++j) fh(j) *= I * k[j];
        return inv(fh);
    }
    void dealias(VecC& fh) const {
        for (int j = 0; j < N; ++j)
            if (!keep[j]) fh(j) = Complex(0, 0);
    }
};

struct NonlinearHat {
    VecC A;  // Fourier coefficients of the A-equation nonlinearity
    VecC B;  // Fourier coefficients of the B-equation nonlinearity (flux applied)
};

NonlinearHat eval_nonlinear(SpectralWorkspace& ws, const ScalarCoeffs& co, Real eps,
                            const VecC& A, const Vec& B, StabilityModel model,
                            Real B0_forcing = 0.0) {
    const int N = ws.N;
    const bool darcy = model == StabilityModel::Darcy;
    VecC Ax = ws.dx(A);
    VecC nA(N), fluxB(N);
    const Complex ceff = darcy ? darcy_ctilde_scalar(co.c, co.d, co.f, co.h) : co.c;
    for (int j = 0; j < N; ++j) {
        const Real a2 = std::norm(A(j));
        nA(j) = ceff * a2 * A(j);
        if (darcy)
            nA(j) += co.d * B0_forcing * A(j);
        else
            nA(j) += co.d * B(j) * A(j);
        fluxB(j) = Complex(a2 * co.h / eps, 0)
                   + Complex((co.g * A(j) * std::conj(Ax(j))).real(), 0);
    }
    NonlinearHat out;
    out.A = ws.fwd(nA);
    ws.dealias(out.A);
    if (!darcy) {
        out.B = ws.fwd(fluxB);
        for (int j = 0; j < N; ++j) out.B(j) *= I * ws.k[j];
        ws.dealias(out.B);
    } else {
        out.B = VecC::Zero(N);
    }
    return out;
}

void check_finite(const FieldState& s) {
    Real amax = 0;
    for (int j = 0; j < s.points; ++j) {
        if (!std::isfinite(s.A(j).real()) || !std::isfinite(s.A(j).imag())
            || !std::isfinite(s.B(j)))
            throw NonFiniteValue("non-finite field value");
        amax = std::max({amax, std::abs(s.A(j)), std::abs(s.B(j))});
    }
    if (amax > 1e8) throw BlowupDetected("field norm exceeded 1e8");
}

} // namespace

FieldState step(const FieldState& state, const ScalarCoeffs& coeffs, Real dt,
                const StepOptions& opt) {
    const int N = state.points;
    SpectralWorkspace ws(N, state.length);
    const bool hyper = state.model == StabilityModel::Hyperbolic;
    const Real eB = hyper ? 0.0 : coeffs.eB;

    if (!opt.exact_forcing && state.model == StabilityModel::Truncated
        && std::abs(coeffs.h) > 0) {
        const Real bound = 0.5 * state.eps * state.dx() / std::abs(coeffs.h);
        if (dt > bound) throw InputError("dt exceeds the explicit-forcing bound");
    }

    // linear symbols per mode
    VecC zA(N), zB(N);
    for (int j = 0; j < N; ++j) {
        const Real k = ws.k[j];
        zA(j) = -coeffs.a * k * k + coeffs.b;
        zB(j) = Complex(-eB * k * k, k * coeffs.f / state.eps);
    }

    VecC Ah = ws.fwd(state.A);
    VecC Bh = ws.fwd(state.B.cast<Complex>());

    NonlinearHat n0 = eval_nonlinear(ws, coeffs, state.eps, state.A, state.B, state.model);

    // half step (exponential Euler)
    VecC Ah_half(N), Bh_half(N);
    for (int j = 0; j < N; ++j) {
        const Complex ea = std::exp(zA(j) * dt / 2.0), eb = std::exp(zB(j) * dt / 2.0);
        const Complex wa = opt.exact_forcing ? phi1(zA(j) * dt / 2.0) : ea;
        const Complex wb = opt.exact_forcing ? phi1(zB(j) * dt / 2.0) : eb;
        Ah_half(j) = ea * Ah(j) + dt / 2.0 * wa * n0.A(j);
        Bh_half(j) = eb * Bh(j) + dt / 2.0 * wb * n0.B(j);
    }
    FieldState half = state;
    half.A = ws.inv(Ah_half);
    {
        VecC bphys = ws.inv(Bh_half);
        half.B = bphys.real();
    }

    NonlinearHat n1 = eval_nonlinear(ws, coeffs, state.eps, half.A, half.B, state.model);

    FieldState out = state;
    VecC Ah1(N), Bh1(N);
    for (int j = 0; j < N; ++j) {
        const Complex ea = std::exp(zA(j) * dt), eb = std::exp(zB(j) * dt);
        const Complex wa = opt.exact_forcing ? phi1(zA(j) * dt) : std::exp(zA(j) * dt / 2.0);
        const Complex wb = opt.exact_forcing ? phi1(zB(j) * dt) : std::exp(zB(j) * dt / 2.0);
        Ah1(j) = ea * Ah(j) + dt * wa * n1.A(j);
        Bh1(j) = eb * Bh(j) + dt * wb * n1.B(j);
    }
    out.A = ws.inv(Ah1);
    {
        VecC bphys = ws.inv(Bh1);
        out.B = bphys.real();
    }
    out.time = state.time + dt;
    check_finite(out);
    return out;
}

Real norm_l2(const VecC& f, Real length) {
    const Real dx = length / f.size();
    Real s = 0;
    for (int j = 0; j < f.size(); ++j) s += std::norm(f(j));
    return std::sqrt(s * dx);
}

Real norm_h1(const VecC& f, Real length) {
    SpectralWorkspace ws(static_cast<int>(f.size()), length);
    VecC fx = ws.dx(f);
    const Real l2 = norm_l2(f, length), d2 = norm_l2(fx, length);
    return std::sqrt(l2 * l2 + d2 * d2);
}

EnergyDiagnostics energy(const FieldState& state) {
    EnergyDiagnostics e;
    e.H1_A = std::pow(norm_h1(state.A, state.length), 2);
    VecC btilde(state.points);
    Real mass = 0;
    const Real dx = state.dx();
    for (int j = 0; j < state.points; ++j) {
        btilde(j) = Complex(state.B(j) + std::norm(state.A(j)), 0);
        mass += state.B(j) * dx;
    }
    e.L2_Btilde = std::pow(norm_l2(btilde, state.length), 2);
    e.E = 0.5 * (e.H1_A + e.L2_Btilde);
    e.mass_B = mass;
    return e;
}

TrajectorySummary simulate(const FieldState& state, const ScalarCoeffs& coeffs,
                           Real T_final, Real dt, int observe_stride,
                           const Observer& extra, const StepOptions& opt) {
    TrajectorySummary out;
    FieldState cur = state;
    auto record = [&](const FieldState& s) {
        EnergyDiagnostics e = energy(s);
        VecC bC = s.B.cast<Complex>();
        out.series.push_back({s.time, norm_l2(s.A, s.length), std::sqrt(e.H1_A),
                              norm_l2(bC, s.length), e.mass_B, e.E});
        if (extra) extra(s);
    };
    record(cur);
    const long nsteps = std::lround(std::ceil(T_final / dt - 1e-12));
    for (long i = 0; i < nsteps; ++i) {
        const Real h = std::min(dt, T_final - cur.time);
        if (h <= 0) break;
        cur = step(cur, coeffs, h, opt);
        if ((i + 1) % observe_stride == 0 || i + 1 == nsteps) record(cur);
    }
    out.final_state = cur;
    return out;
}

DarcyTrajectory darcy_run(const ScalarCoeffs& coeffs, const VecC& A_init, Real length,
                          Real B0_init, Real eps, Real T_final, Real dt) {
    if (coeffs.f == 0) throw SingularF("Darcy closure needs f != 0");
    const int N = static_cast<int>(A_init.size());
    SpectralWorkspace ws(N, length);

    FieldState cur;
    cur.length = length;
    cur.points = N;
    cur.A = A_init;
    cur.B = Vec::Zero(N);
    cur.eps = eps;
    cur.model = StabilityModel::Darcy;

    auto avg_sq = [&](const VecC& A) {
        Real s = 0;
        for (int j = 0; j < N; ++j) s += std::norm(A(j));
        return s / N;
    };
    const Real hf = coeffs.h / coeffs.f;
    const Real avg0 = avg_sq(cur.A);
    Real B0 = B0_init;

    DarcyTrajectory out;
    auto reconstruct = [&]() {
        for (int j = 0; j < N; ++j) cur.B(j) = B0 - hf * std::norm(cur.A(j));
    };
    auto record = [&]() {
        reconstruct();
        Real mass = 0;
        for (int j = 0; j < N; ++j) mass += cur.B(j) * cur.dx();
        out.times.push_back(cur.time);
        out.B0_series.push_back(B0);
        out.massB_series.push_back(mass);
    };
    record();
    const long nsteps = std::lround(std::ceil(T_final / dt - 1e-12));
    for (long i = 0; i < nsteps; ++i) {
        const Real h = std::min(dt, T_final - cur.time);
        if (h <= 0) break;
        // step the reduced cGL with the current B0 frozen over the step
        FieldState nxt = cur;
        {
            VecC zA(N);
            for (int j = 0; j < N; ++j)
                zA(j) = -coeffs.a * ws.k[j] * ws.k[j] + coeffs.b;
            VecC Ah = ws.fwd(cur.A);
            NonlinearHat n0 = eval_nonlinear(ws, coeffs, eps, cur.A, cur.B,
                                             StabilityModel::Darcy, B0);
            VecC Ah_half(N);
            for (int j = 0; j < N; ++j)
                Ah_half(j) = std::exp(zA(j) * h / 2.0) * Ah(j)
                             + h / 2.0 * phi1(zA(j) * h / 2.0) * n0.A(j);
            VecC A_half = ws.inv(Ah_half);
            NonlinearHat n1 = eval_nonlinear(ws, coeffs, eps, A_half, cur.B,
                                             StabilityModel::Darcy, B0);
            VecC Ah1(N);
            for (int j = 0; j < N; ++j)
                Ah1(j) = std::exp(zA(j) * h) * Ah(j) + h * phi1(zA(j) * h) * n1.A(j);
            nxt.A = ws.inv(Ah1);
            nxt.time = cur.time + h;
        }
        cur = nxt;
        check_finite(cur);
        // B0 compatibility: exact integral of the averaged closure forcing
        B0 = B0_init + hf * (avg_sq(cur.A) - avg0);
        if ((i + 1) % 10 == 0 || i + 1 == nsteps) record();
    }
    reconstruct();
    out.final_state = cur;
    return out;
}

} // namespace convamp
