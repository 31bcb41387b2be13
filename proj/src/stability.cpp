#include "convamp/stability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "convamp/amplitude.hpp"
#include "convamp/errors.hpp"

namespace convamp {

WaveParams wave_family(const ScalarCoeffs& coeffs, Real kappa, Real B0) {
    const Complex bb = coeffs.b + coeffs.d * B0;
    if (bb.real() <= 0)
        throw OutsideExistenceBand("Re(b + d B0) <= 0: no bifurcating waves");
    if (coeffs.c.real() >= 0)
        throw NegativeAmplitude("Re c >= 0: subcritical Landau constant");
    WaveParams w;
    w.kappa = kappa;
    w.B0 = B0;
    w.kappaE2 = bb.real() / coeffs.a.real();
    if (kappa * kappa > w.kappaE2)
        throw OutsideExistenceBand("kappa^2 beyond the existence band");
    const Real alsq = (-bb.real() + coeffs.a.real() * kappa * kappa) / coeffs.c.real();
    if (alsq < 0) throw NegativeAmplitude("negative amplitude squared");
    w.alpha = std::sqrt(alsq);
    w.omega = coeffs.a.imag() * kappa * kappa - bb.imag() - coeffs.c.imag() * alsq;
    return w;
}

namespace {

// real 2x2 representation [[z]] of multiplication by z on (Re, Im) pairs
Eigen::Matrix2d rep2(Complex z) {
    Eigen::Matrix2d m;
    m << z.real(), -z.imag(), z.imag(), z.real();
    return m;
}

void truncated_parts(const ScalarCoeffs& co, const WaveParams& w, Real eps,
                     bool hyperbolic, Mat& M2, Mat& M1, Mat& M0) {
    const Real A0 = w.alpha, kap = w.kappa;
    const Real eB = hyperbolic ? 0.0 : co.eB;
    const Complex g = hyperbolic ? Complex(0, 0) : co.g;
    M2.setZero(3, 3);
    M2.topLeftCorner(2, 2) = rep2(co.a);
    M2(2, 0) = 2 * A0 * g.real();
    M2(2, 1) = 2 * A0 * g.imag();
    M2(2, 2) = eB;
    M1.setZero(3, 3);
    M1.topLeftCorner(2, 2) = rep2(2.0 * I * kap * co.a);
    M1(2, 0) = 2 * A0 * co.h / eps + 2 * A0 * kap * g.imag();
    M1(2, 2) = co.f / eps;
    M0.setZero(3, 3);
    M0(0, 0) = 2 * A0 * A0 * co.c.real();
    M0(1, 0) = 2 * A0 * A0 * co.c.imag();
    M0(0, 2) = co.d.real() * A0;
    M0(1, 2) = co.d.imag() * A0;
}

} // namespace

StabilityMatrix build_M(const ScalarCoeffs& coeffs, const WaveParams& wave,
                        Real eps, Real sigma, StabilityModel model,
                        const ReducedExampleData* red) {
    StabilityMatrix sm;
    sm.model = model;
    sm.eps = eps;
    sm.sigma = sigma;
    switch (model) {
        case StabilityModel::Truncated:
        case StabilityModel::Hyperbolic: {
            Mat M2, M1, M0;
            truncated_parts(coeffs, wave, eps, model == StabilityModel::Hyperbolic, M2, M1, M0);
            sm.entries = -sigma * sigma * M2.cast<Complex>() + I * sigma * M1.cast<Complex>()
                         + M0.cast<Complex>();
            break;
        }
        case StabilityModel::Darcy: {
            const Complex ct = darcy_ctilde_scalar(coeffs.c, coeffs.d, coeffs.f, coeffs.h);
            const Complex bt = coeffs.b + coeffs.d * wave.B0;
            const Real alsq = (-bt.real() + coeffs.a.real() * wave.kappa * wave.kappa) / ct.real();
            if (alsq < 0) throw NegativeAmplitude("Darcy wave amplitude undefined");
            const Real At = std::sqrt(alsq);
            Mat M2 = rep2(coeffs.a);
            Mat M1 = rep2(2.0 * I * wave.kappa * coeffs.a);
            Mat M0 = Mat::Zero(2, 2);
            M0(0, 0) = 2 * At * At * ct.real();
            M0(1, 0) = 2 * At * At * ct.imag();
            sm.entries = -sigma * sigma * M2.cast<Complex>() + I * sigma * M1.cast<Complex>()
                         + M0.cast<Complex>();
            break;
        }
        case StabilityModel::ReducedExample: {
            if (!red) throw InputError("ReducedExample model needs ReducedExampleData");
            const Real ks = red->k_star, kap = red->kappa_t, al = red->alpha;
            Mat M0 = Mat::Zero(3, 3);
            M0(0, 0) = 2 * al * al * red->gamma.real();
            M0(1, 0) = 2 * al * al * red->gamma.imag();
            M0(0, 2) = al * red->V1.real();
            M0(1, 2) = al * red->V1.imag();
            Mat M1 = Mat::Zero(3, 3);
            M1.topLeftCorner(2, 2) = kap * ks * rep2(-I * red->lambda_kk);
            M1(2, 0) = -2 * kap * ks * al * red->v.imag();
            Mat S1 = Mat::Zero(3, 3);
            S1(2, 0) = 0.5 * ks * al * red->r1_sq;
            S1(2, 2) = red->C0;
            Mat S2 = Mat::Zero(3, 3);
            S2(2, 0) = 0.5 * (kap * al + ks * red->alpha1) * red->r1_sq;
            S2(2, 2) = red->C0_eps;
            Mat M2 = Mat::Zero(3, 3);
            M2.topLeftCorner(2, 2) = ks * ks * rep2(-0.5 * red->lambda_kk);
            M2(2, 0) = ks * ks * al * (red->r2_sq + red->v.real());
            M2(2, 1) = ks * ks * al * red->v.imag();
            M2(2, 2) = 2 * ks * ks;
            sm.entries = -sigma * sigma * M2.cast<Complex>()
                         + I * sigma * (S1 + eps * S2 + eps * M1).cast<Complex>()
                         + eps * eps * M0.cast<Complex>();
            break;
        }
    }
    return sm;
}

NeutralExpansion neutral_expansion(const ScalarCoeffs& coeffs, const WaveParams& wave,
                                   Real eps) {
    const Real A0 = wave.alpha;
    NeutralExpansion ne;
    ne.p = -coeffs.d.real() / (2 * A0 * coeffs.c.real());
    ne.q = -coeffs.c.imag() / coeffs.c.real();
    const Real denom = 2 * A0 * coeffs.h * ne.p + coeffs.f;
    if (std::abs(denom) < 1e-12)
        throw DegenerateDenominator("2 A0 h p + f vanishes: first-order collision");

    Mat M2, M1m, M0;
    truncated_parts(coeffs, wave, eps, false, M2, M1m, M0);
    const MatC Msig = I * M1m.cast<Complex>();

    // generalized eigenbasis of M(eps,0)
    VecC Rt(3), Rc(3), Rs(3);
    Rt << 0, 1, 0;
    Rc << ne.p, 0, 1;
    Rs << 1, -ne.q, 0;
    RowVecC Lt(3), Lc(3), Ls(3);
    Lt << ne.q, 1, -ne.p * ne.q;
    Lc << 0, 0, 1;
    Ls << 1, 0, -ne.p;
    const Real lam_s = 2 * A0 * A0 * coeffs.c.real();
    const MatC S = (Rs * Ls) / lam_s;  // reduced resolvent over the stable direction

    // first-order block P Msig P in the {Rt, Rc} basis
    const Complex m_tt = (Lt * Msig * Rt)(0, 0);
    const Complex m_tc = (Lt * Msig * Rc)(0, 0);
    const Complex m_cc = (Lc * Msig * Rc)(0, 0);
    ne.F_eps = m_tc / (m_cc - m_tt);
    ne.lam_t1 = m_tt;
    ne.lam_c1 = m_cc;

    const VecC Rc_t = Rc + ne.F_eps * Rt;
    const RowVecC Lt_t = Lt - ne.F_eps * Lc;
    const MatC M2c = M2.cast<Complex>();
    ne.mu_t = -(Lt_t * M2c * Rt)(0, 0) - (Lt_t * (Msig * S * Msig) * Rt)(0, 0);
    ne.mu_c = -(Lc * M2c * Rc_t)(0, 0) - (Lc * (Msig * S * Msig) * Rc_t)(0, 0);

    const Complex ct = darcy_ctilde_scalar(coeffs.c, coeffs.d, coeffs.f, coeffs.h);
    ne.mu_c_leading = coeffs.d.real() * coeffs.f * coeffs.h * ct.real()
                      / (2 * A0 * A0 * std::pow(coeffs.c.real(), 3)) / (eps * eps);
    return ne;
}

Real eckhaus_band(Complex a, Complex b, Complex c) {
    // kappa_S^2 from the vanishing of the neutral sigma^2 coefficient:
    //   C2(kappa) = q Im a - Re a - 2 kappa^2 Re(a)^2 (1+q^2) / (alpha^2 Re c)
    // with alpha^2 Re c = -Re b + Re a kappa^2 and q = -Im c / Re c.
    const Real q = -c.imag() / c.real();
    const Real G = q * a.imag() - a.real();
    const Real num = -G * b.real();
    const Real den = 2 * a.real() * a.real() * (1 + q * q) - G * a.real();
    return num / den;
}

DarcyExpansion darcy_expansion(const ScalarCoeffs& coeffs, const WaveParams& wave) {
    DarcyExpansion de;
    de.ctilde = darcy_ctilde_scalar(coeffs.c, coeffs.d, coeffs.f, coeffs.h);
    const Complex bt = coeffs.b + coeffs.d * wave.B0;
    if (de.ctilde.real() >= 0) {
        // subcritical Darcy reduction: no waves, band empty
        de.kappaS2 = 0;
        de.C2 = Complex(1, 0);
        return de;
    }
    const Real alsq = (-bt.real() + coeffs.a.real() * wave.kappa * wave.kappa) / de.ctilde.real();
    if (alsq < 0) throw NegativeAmplitude("Darcy amplitude undefined at this kappa");
    const Real qt = -de.ctilde.imag() / de.ctilde.real();
    // neutral sigma^2 coefficient of the Darcy 2x2, stability iff Re C2 < 0
    de.C2 = Complex(qt * coeffs.a.imag() - coeffs.a.real()
                        - 2 * wave.kappa * wave.kappa * coeffs.a.real() * coeffs.a.real()
                              * (1 + qt * qt) / (alsq * de.ctilde.real()),
                    0.0);
    de.kappaS2 = eckhaus_band(coeffs.a, bt, de.ctilde);
    return de;
}

MatC track_branches(const ScalarCoeffs& coeffs, const WaveParams& wave, Real eps,
                    StabilityModel model, const std::vector<Real>& sigmas,
                    const ReducedExampleData* red) {
    const int nb = model == StabilityModel::Darcy ? 2 : 3;
    MatC out(static_cast<int>(sigmas.size()), nb);
    VecC prev(nb);
    {
        Eigen::ComplexEigenSolver<MatC> es(build_M(coeffs, wave, eps, 0.0, model, red).entries,
                                           true);
        // order: (translational, conserved, stable); at sigma=0 classify by
        // eigenvector weight on the conserved component and by real part.
        std::vector<int> idx(nb);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int i, int j) {
            return es.eigenvalues()(i).real() > es.eigenvalues()(j).real();
        });
        if (nb == 3) {
            const int s_idx = idx[2];
            int c_idx = idx[0], t_idx = idx[1];
            if (std::abs(es.eigenvectors()(2, idx[0])) < std::abs(es.eigenvectors()(2, idx[1])))
                std::swap(c_idx, t_idx);
            prev << es.eigenvalues()(t_idx), es.eigenvalues()(c_idx), es.eigenvalues()(s_idx);
        } else {
            prev << es.eigenvalues()(idx[0]), es.eigenvalues()(idx[1]);
        }
    }
    for (int row = 0; row < static_cast<int>(sigmas.size()); ++row) {
        Eigen::ComplexEigenSolver<MatC> es(
            build_M(coeffs, wave, eps, sigmas[row], model, red).entries, false);
        std::vector<Complex> pool(es.eigenvalues().data(),
                                  es.eigenvalues().data() + nb);
        VecC cur(nb);
        for (int j = 0; j < nb; ++j) {
            int best = 0;
            Real bd = 1e300;
            for (size_t m = 0; m < pool.size(); ++m) {
                const Real d = std::abs(pool[m] - prev(j));
                if (d < bd) { bd = d; best = static_cast<int>(m); }
            }
            cur(j) = pool[best];
            pool.erase(pool.begin() + best);
        }
        out.row(row) = cur.transpose();
        prev = cur;
    }
    return out;
}

std::vector<ScanRow> scan_S(const ScalarCoeffs& coeffs, Real eps, Real rho,
                            const std::vector<Real>& kappa_grid) {
    std::vector<ScanRow> rows;
    rows.reserve(kappa_grid.size());
    const int nsig = 401;
    for (Real kap : kappa_grid) {
        ScanRow row{kap, -1e300, -1e300};
        WaveParams w = wave_family(coeffs, kap, 0.0);
        for (int i = 0; i < nsig; ++i) {
            const Real s = -rho + 2 * rho * i / (nsig - 1);
            Eigen::ComplexEigenSolver<MatC> es(
                build_M(coeffs, w, eps, s, StabilityModel::Truncated).entries, false);
            row.S = std::max(row.S, es.eigenvalues().real().maxCoeff());
        }
        bool darcy_ok = true;
        try {
            for (int i = 0; i < nsig; ++i) {
                const Real s = -1.0 + 2.0 * i / (nsig - 1);
                Eigen::ComplexEigenSolver<MatC> es(
                    build_M(coeffs, w, eps, s, StabilityModel::Darcy).entries, false);
                row.SD = std::max(row.SD, es.eigenvalues().real().maxCoeff());
            }
        } catch (const NumericalError&) {
            darcy_ok = false;
        }
        if (!darcy_ok) row.SD = 1.0;  // no Darcy wave at this kappa: mark unstable
        rows.push_back(row);
    }
    return rows;
}

std::vector<ScanRow> scan_stability(const ScalarCoeffs& coeffs, Real eps,
                                    const ScanOptions& opt) {
    WaveParams w0 = wave_family(coeffs, 0.0, 0.0);
    const Real kE = std::sqrt(w0.kappaE2);
    const Real rho = opt.rho > 0 ? opt.rho : 10 * eps;
    std::vector<Real> grid;
    for (int i = 0; i < opt.kappa_points; ++i)
        grid.push_back(-opt.kappa_frac * kE
                       + 2 * opt.kappa_frac * kE * i / (opt.kappa_points - 1));
    return scan_S(coeffs, eps, rho, grid);
}

BalanceReport balance_check(const ScalarCoeffs& coeffs, const WaveParams& wave, Real eps) {
    BalanceReport rep;
    rep.eps = eps;
    rep.decoupled = std::abs(coeffs.d) < 1e-14;
    if (rep.decoupled) {
        rep.jordan_first_order = false;
        rep.first_order_gap = Complex(0, 0);
        rep.sigma_radius = 0;
        return rep;
    }
    try {
        NeutralExpansion ne = neutral_expansion(coeffs, wave, eps);
        rep.first_order_gap = ne.lam_c1 - ne.lam_t1;
        rep.jordan_first_order = std::abs(rep.first_order_gap) < 1e-10;
    } catch (const DegenerateDenominator&) {
        rep.jordan_first_order = true;
        rep.first_order_gap = Complex(0, 0);
    }
    // scan sigma upward until the two neutral branches approach each other
    // or the stable branch: estimated separation radius
    const int nstep = 400;
    const Real smax = 0.5;
    std::vector<Real> sig;
    for (int i = 0; i <= nstep; ++i) sig.push_back(smax * i / nstep);
    MatC tr = track_branches(coeffs, wave, eps, StabilityModel::Truncated, sig);
    rep.sigma_radius = smax;
    for (int i = 1; i <= nstep; ++i) {
        const Real gap_tc = std::abs(tr(i, 0) - tr(i, 1));
        const Real gap_ts = std::abs(tr(i, 0) - tr(i, 2));
        const Real gap_cs = std::abs(tr(i, 1) - tr(i, 2));
        const Real g = std::min({gap_tc, gap_ts, gap_cs});
        if (g < 1e-3 * std::max(Real(1), std::abs(tr(i, 2)))) {
            rep.sigma_radius = sig[i];
            break;
        }
    }
    return rep;
}

} // namespace convamp
