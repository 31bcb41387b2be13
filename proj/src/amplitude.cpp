#include "convamp/amplitude.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>
#include <cmath>
#include <sstream>

#include "convamp/errors.hpp"

namespace convamp {

namespace {

// orthonormal basis of range(P) as columns
Mat range_basis(const Mat& P, int rank) {
    Eigen::ColPivHouseholderQR<Mat> qr(P);
    Mat Q = qr.householderQ();
    return Q.leftCols(rank);
}

MatC reduced_inverse_map(const MatC& M, const MatC& P) {
    // returns the map w -> reduced_solve(M, P, w) as a matrix
    const int n = static_cast<int>(P.rows());
    MatC out(n, n);
    for (int j = 0; j < n; ++j) out.col(j) = reduced_solve(M, P, VecC(VecC::Unit(n, j)));
    return out;
}

} // namespace

PsiCorrections compute_psi(const FourierSymbol& sym, const CriticalData& crit,
                           const NonlinearitySpec& spec) {
    const int n = sym.dim;
    PsiCorrections psi;
    psi.Pi0 = kernel_projection(sym, 0.0);
    const MatC P0 = psi.Pi0.cast<Complex>();
    const MatC S00 = sym.eval(0.0, 0.0);
    const MatC Skc = sym.d_k(crit.k_star, 0.0);
    const MatC S1 = sym.eval(crit.k_star, 0.0)
                    + I * crit.d_star * crit.k_star * MatC::Identity(n, n);
    const MatC Pi1 = crit.r_vec * crit.l_vec;

    psi.N0 = -reduced_inverse_map(S00, P0);
    psi.N1 = reduced_inverse_map(S1, Pi1);
    const MatC S2m = sym.eval(2 * crit.k_star, 0.0)
                     + 2.0 * I * crit.k_star * crit.d_star * MatC::Identity(n, n);
    Eigen::FullPivLU<MatC> lu2(S2m);
    if (!lu2.isInvertible()) throw SingularReducedBlock("S(2k*,0) + 2i k* d* singular");
    psi.N2 = lu2.inverse();

    const VecC qrr = multiplier_Q(spec, crit.k_star, -crit.k_star, crit.r_vec,
                                  crit.r_vec.conjugate());
    // solvability of the mode-0 equation at order eps^2 fixes Psi_0:
    // (I-Pi0) S(0,0) Psi_0 = -1/2 |A|^2 (I-Pi0) Q(r, conj r)
    const VecC rhs0 = (-0.5 * qrr.real()).cast<Complex>();
    VecC psi0c = reduced_solve(S00, P0, rhs0);
    psi.psi0_coeff = psi0c.real();

    psi.psi1_coeff = I * (psi.N1 * (Skc * crit.r_vec));

    const VecC qrr2 = multiplier_Q(spec, crit.k_star, crit.k_star, crit.r_vec, crit.r_vec);
    psi.psi2_coeff = -0.5 * (psi.N2 * (outer_factor(spec, 2.0 * I * crit.k_star) * qrr2));
    return psi;
}

void compute_cgl_coeffs(const FourierSymbol& sym, const CriticalData& crit,
                        const NonlinearitySpec& spec, const PsiCorrections& psi,
                        AmplitudeCoeffs& out) {
    (void)sym;
    out.a = -0.5 * crit.lambda_kk;
    out.b = crit.lambda_mu;

    const Real ks = crit.k_star;
    const MatC Mk = outer_factor(spec, I * ks);
    const VecC q_psi0 = multiplier_Q(spec, ks, 0.0, crit.r_vec,
                                     psi.psi0_coeff.cast<Complex>());
    const VecC q_psi2 = multiplier_Q(spec, -ks, 2 * ks, crit.r_vec.conjugate(),
                                     psi.psi2_coeff);
    const VecC cr = multiplier_C(spec, ks, ks, -ks, crit.r_vec, crit.r_vec,
                                 crit.r_vec.conjugate());
    out.gamma = (crit.l_vec * (Mk * (2.0 * q_psi0 + q_psi2)))(0, 0)
                + 0.75 * (crit.l_vec * (Mk * cr))(0, 0);

    const int r = sym.conserved_rank;
    const Mat B0 = range_basis(psi.Pi0, r);
    out.V1 = VecC::Zero(r);
    for (int j = 0; j < r; ++j) {
        const VecC qw = multiplier_Q(spec, ks, 0.0, crit.r_vec, B0.col(j).cast<Complex>());
        out.V1(j) = 2.0 * (crit.l_vec * (Mk * qw))(0, 0);
    }
}

void compute_mean_coeffs(const FourierSymbol& sym, const CriticalData& crit,
                         const NonlinearitySpec& spec, const PsiCorrections& psi,
                         AmplitudeCoeffs& out) {
    const int n = sym.dim;
    const int r = sym.conserved_rank;
    const Real ks = crit.k_star;
    const MatC P0 = psi.Pi0.cast<Complex>();
    const MatC IP0 = MatC::Identity(n, n) - P0;
    const Mat B0 = range_basis(psi.Pi0, r);
    const MatC B0c = B0.cast<Complex>();
    const MatC Sk0 = sym.d_k(0.0, 0.0);
    const MatC Skk0 = sym.d_kk(0.0, 0.0);
    const Real scaleSk = std::max(Sk0.norm(), Real(1.0));

    // F = -i Pi0 S_k(0,0) Pi0 + (d*+delta) Pi0 restricted to range Pi0
    const MatC Fful = -I * P0 * Sk0 * P0 + (crit.d_star + crit.delta) * P0;
    const MatC Fres = B0c.adjoint() * Fful * B0c;
    out.F_mat = Fres.real();
    out.compat_F = Fres.norm() < 1e-9 * scaleSk;

    const VecC qrr = multiplier_Q(spec, ks, -ks, crit.r_vec, crit.r_vec.conjugate());
    const VecC Hful = 0.5 * (P0 * qrr);  // 1/4 Pi0 Qt(r, conj r), Qt = 2Q
    const VecC Hres = B0c.adjoint() * Hful;
    out.H_vec = Hres.real();
    out.H_im_residue = Hres.imag().norm();

    // compatibility of the |A|^2 coefficient:
    // i Pi0 S_k N0 (I-Pi0) Qt(r,conj r) + Pi0 Qt(r,conj r)
    const VecC compat = I * (P0 * (Sk0 * (psi.N0 * (IP0 * (2.0 * qrr)))))
                        + 2.0 * (P0 * qrr);
    out.compat_H = compat.norm() < 1e-9 * std::max(qrr.norm() * 2, Real(1e-30))
                   || compat.norm() < 1e-12;

    out.o2_mode = out.compat_F && out.compat_H
                  && std::abs(crit.lambda.imag()) < 1e-9
                  && Sk0.norm() < 1e-12;

    // mean diffusion, O(2) convention: B_t = D B_xx with D = -1/2 Pi0 S_kk Pi0
    out.D_mat = (B0c.adjoint() * (-0.5 * (P0 * Skk0 * P0)) * B0c).real();

    // W0: three-term sum (quadratic-sourced forcing of (|A|^2)_xx)
    const VecC iN1Skr = I * (psi.N1 * (sym.d_k(ks, 0.0) * crit.r_vec));
    const VecC w0_1 = 0.25 * (P0 * (Skk0 * (psi.N0 * (IP0 * qrr))));
    const VecC w0_2 = 0.5 * (P0 * multiplier_Q(spec, ks, -ks, crit.r_vec, iN1Skr));
    const VecC w0_3 = 0.5 * (P0 * multiplier_Qnu(spec, ks, -ks, crit.r_vec,
                                                 crit.r_vec.conjugate()));
    out.W0 = (B0c.adjoint() * (w0_1 + w0_2 + w0_3)).real();

    // v: coefficient of dx Re(A conj(A_x) v)
    const VecC qv = multiplier_Q(spec, ks, -ks, crit.r_vec, iN1Skr.conjugate());
    out.v_vec = B0c.adjoint() * (2.0 * (P0 * qv));
}

AmplitudeCoeffs compute_amplitude_coeffs(const FourierSymbol& sym,
                                         const CriticalData& crit,
                                         const NonlinearitySpec& spec,
                                         const PsiCorrections& psi) {
    AmplitudeCoeffs out;
    compute_cgl_coeffs(sym, crit, spec, psi, out);
    compute_mean_coeffs(sym, crit, spec, psi, out);
    try {
        DarcyReduction red = darcy_reduce(out);
        out.darcy_ctilde = red.ctilde;
        out.darcy_deltaA = red.deltaA;
    } catch (const SingularF&) {
        out.darcy_ctilde = Complex(0, 0);
        out.darcy_deltaA = Complex(0, 0);
    }
    return out;
}

DarcyReduction darcy_reduce(const AmplitudeCoeffs& coeffs) {
    const int r = static_cast<int>(coeffs.F_mat.rows());
    Eigen::FullPivLU<Mat> lu(coeffs.F_mat);
    if (coeffs.F_mat.norm() < 1e-12 || !lu.isInvertible())
        throw SingularF("singular convection matrix F is not invertible (compatible case)");
    DarcyReduction red;
    red.B_closure_coeff = lu.solve(coeffs.H_vec);
    Complex coupling(0, 0);
    for (int j = 0; j < r; ++j) coupling += coeffs.V1(j) * red.B_closure_coeff(j);
    red.deltaA = -coupling;
    red.ctilde = coeffs.gamma + red.deltaA;
    return red;
}

Complex darcy_ctilde_scalar(Complex c, Complex d, Real f, Real h) {
    if (f == 0) throw SingularF("f = 0 in the scalar Darcy reduction");
    return c - d * h / f;
}

namespace {

struct OracleFields {
    VecC A, Axh, Axhxh, Ath;
};

} // namespace

ResidualReport residual_oracle(const FourierSymbol& sym, const NonlinearitySpec& spec,
                               const CriticalData& crit, const AmplitudeCoeffs& coeffs,
                               const PsiCorrections& psi, const std::vector<Real>& eps_list,
                               const ResidualOracleOptions& opt) {
    const int n = sym.dim;
    const int r = sym.conserved_rank;
    const Real ks = crit.k_star;
    const Mat B0 = range_basis(psi.Pi0, r);
    Vec beta = opt.beta.size() == r ? opt.beta : Vec(Vec::Zero(r));
    const VecC beta_full = (B0 * beta).cast<Complex>();

    // wave family in the amplitude variables
    Complex bb = coeffs.b;
    for (int j = 0; j < r; ++j) bb += coeffs.V1(j) * beta(j);
    const Real kap = opt.kappa;
    Real alsq = (-bb.real() + coeffs.a.real() * kap * kap) / coeffs.gamma.real();
    if (alsq < -1e-14) throw OutsideExistenceBand("oracle wave outside the existence band");
    alsq = std::max(alsq, Real(0));
    const Real alpha = std::sqrt(alsq);
    const Real omega = coeffs.a.imag() * kap * kap - bb.imag() - coeffs.gamma.imag() * alsq;

    ResidualReport rep;
    const int N = opt.grid_points;
    Eigen::FFT<Real> fft;

    for (Real eps : eps_list) {
        const Real mu = eps * eps;
        const Real keff = ks + eps * kap;
        const Real L = 2 * M_PI / keff;

        OracleFields f;
        f.A.resize(N);
        for (int i = 0; i < N; ++i) {
            const Real x = L * i / N;
            f.A(i) = alpha * std::exp(I * kap * (eps * x));
        }
        f.Axh = I * kap * f.A;
        f.Axhxh = -kap * kap * f.A;
        f.Ath = -I * omega * f.A;

        // assemble U and its exact time derivative on the grid
        Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(N, n);
        Eigen::MatrixXcd Ut = Eigen::MatrixXcd::Zero(N, n);
        for (int i = 0; i < N; ++i) {
            const Real x = L * i / N;
            const Complex e1 = std::exp(I * (ks * x));
            const Complex e2 = e1 * e1;
            const Complex A = f.A(i), Axh = f.Axh(i), Axhxh = f.Axhxh(i), Ath = f.Ath(i);
            const Real Asq = std::norm(A);
            VecC row = eps * (A * e1 * crit.r_vec)
                     + eps * eps * (beta_full + Asq * psi.psi0_coeff.cast<Complex>())
                     + eps * eps * (Axh * e1 * psi.psi1_coeff)
                     + eps * eps * (A * A * e2 * psi.psi2_coeff);
            // the ansatz carries 1/2 A e^{i xi} r + c.c.; build via real parts
            VecC dxi = eps * (I * A * e1 * crit.r_vec)
                     + eps * eps * (I * Axh * e1 * psi.psi1_coeff)
                     + eps * eps * (2.0 * I * A * A * e2 * psi.psi2_coeff);
            VecC dxh = eps * (Axh * e1 * crit.r_vec)
                     + eps * eps * (Axhxh * e1 * psi.psi1_coeff)
                     + eps * eps * (2.0 * A * Axh * e2 * psi.psi2_coeff);
            VecC dth = eps * (Ath * e1 * crit.r_vec)
                     + eps * eps * (I * kap * Ath * e1 * psi.psi1_coeff)
                     + eps * eps * (2.0 * A * Ath * e2 * psi.psi2_coeff);
            // |A|^2 and beta are constant for the exponential solution
            U.row(i) = row.real().cast<Complex>();
            Ut.row(i) = (-ks * crit.d_star * dxi.real()
                         - eps * (crit.d_star + crit.delta) * dxh.real()
                         + eps * eps * dth.real()).cast<Complex>();
        }

        // spectral application of L(mu) and assembly of N(U)
        const Real dk = 2 * M_PI / L;
        Eigen::MatrixXcd Uh(N, n), LUh(N, n);
        for (int c = 0; c < n; ++c) {
            VecC col = U.col(c), out(N);
            fft.fwd(out, col);
            Uh.col(c) = out / Real(N);
        }
        std::vector<Real> freqs(N);
        for (int j = 0; j < N; ++j) freqs[j] = dk * (j <= N / 2 ? j : j - N);
        for (int j = 0; j < N; ++j)
            LUh.row(j) = (sym.eval(freqs[j], mu) * Uh.row(j).transpose()).transpose();

        // derivative fields for the polynomial nonlinearity
        std::vector<Mat> derivs(std::max(1, sym.order));
        {
            Eigen::MatrixXcd work = Uh;
            for (int a = 0; a < std::max(1, sym.order); ++a) {
                Eigen::MatrixXcd phys(N, n);
                for (int c = 0; c < n; ++c) {
                    VecC col = work.col(c) * Real(N), out(N);
                    fft.inv(out, col);  // Eigen's inv applies the 1/N scaling
                    phys.col(c) = out;
                }
                derivs[a] = phys.real();
                for (int j = 0; j < N; ++j) work.row(j) *= I * freqs[j];
            }
        }
        Mat Nt = eval_ntilde(spec, derivs);
        Eigen::MatrixXcd NUh(N, n);
        for (int c = 0; c < n; ++c) {
            VecC col = Nt.col(c).cast<Complex>(), out(N);
            fft.fwd(out, col);
            NUh.col(c) = out / Real(N);
        }
        for (int j = 0; j < N; ++j)
            NUh.row(j) = (outer_factor(spec, I * freqs[j]) * NUh.row(j).transpose()).transpose();

        // residual R = Ut - L U - N(U), as Fourier coefficients
        Eigen::MatrixXcd Rth(N, n);
        for (int c = 0; c < n; ++c) {
            VecC col = Ut.col(c), out(N);
            fft.fwd(out, col);
            Rth.col(c) = out / Real(N);
        }
        Eigen::MatrixXcd Rh = Rth - LUh - NUh;

        ResidualSample s;
        s.eps = eps;
        s.mode1_l = std::abs((crit.l_vec * Rh.row(1).transpose())(0, 0)) / eps;
        s.mode0_pi0 = (psi.Pi0.cast<Complex>() * Rh.row(0).transpose()).norm();
        s.mode0_full = Rh.row(0).norm();
        rep.samples.push_back(s);
    }

    // log-log slope of the mode-1 residual
    if (rep.samples.size() >= 2) {
        Real sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int m = static_cast<int>(rep.samples.size());
        for (const auto& s : rep.samples) {
            const Real lx = std::log(s.eps), ly = std::log(std::max(s.mode1_l, 1e-300));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        rep.mode1_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    if (opt.throw_on_shallow && rep.mode1_slope < opt.min_slope) {
        std::ostringstream os;
        os << "mode-1 residual slope " << rep.mode1_slope << " below " << opt.min_slope;
        throw SlopeTooShallow(os.str());
    }
    return rep;
}

} // namespace convamp
