#pragma once

#include <vector>

#include "convamp/critical.hpp"
#include "convamp/nonlinearity.hpp"
#include "convamp/symbol.hpp"
#include "convamp/types.hpp"

namespace convamp {

/// Second-order corrections of the modulation ansatz and the reduced
/// inverses they are built from.
struct PsiCorrections {
    Mat Pi0;           // kernel projection at mu = 0
    MatC N0;           // -((I-Pi0) S(0,0) (I-Pi0))^-1 as a map on range(I-Pi0)
    MatC N1;           // ((I-Pi1)(S(k*,0)+i d* k*)(I-Pi1))^-1 on range(I-Pi1)
    MatC N2;           // (S(2k*,0)+2i k* d*)^-1
    Vec psi0_coeff;    // Psi_0 = |A|^2 psi0_coeff, real, in range(I-Pi0)
    VecC psi1_coeff;   // (I-Pi1) Psi_1 = A_x * psi1_coeff
    VecC psi2_coeff;   // Psi_2 = A^2 * psi2_coeff
};

PsiCorrections compute_psi(const FourierSymbol& sym, const CriticalData& crit,
                           const NonlinearitySpec& spec);

/// Coefficients of the coupled amplitude system
///   A_t = a A_xx + b A + gamma |A|^2 A + A V1.B
///   B_t = eps^-1 (F B + H |A|^2)_x + D B_xx + (|A|^2)_xx W0 + dx Re(A conj(A_x) v)
struct AmplitudeCoeffs {
    Complex a;         // -1/2 lambda_kk
    Complex b;         // lambda_mu
    Complex gamma;
    VecC V1;           // B-coupling functional in the A equation (acts on range Pi0)
    Mat F_mat;         // singular convection, r x r on range Pi0
    Vec H_vec;         // 1/4 Pi0 Qt(k*,-k*)(r, conj r), real part
    Real H_im_residue = 0;
    Mat D_mat;         // mean diffusion, r x r
    Vec W0;
    VecC v_vec;
    bool o2_mode = false;
    bool compat_F = false;
    bool compat_H = false;
    Complex darcy_ctilde;   // filled by darcy_reduce
    Complex darcy_deltaA;
};

/// cGL coefficients (a, b, gamma, V1).
void compute_cgl_coeffs(const FourierSymbol& sym, const CriticalData& crit,
                        const NonlinearitySpec& spec, const PsiCorrections& psi,
                        AmplitudeCoeffs& out);

/// Mean-mode coefficients (F, H, D, W0, v) and compatibility flags.
void compute_mean_coeffs(const FourierSymbol& sym, const CriticalData& crit,
                         const NonlinearitySpec& spec, const PsiCorrections& psi,
                         AmplitudeCoeffs& out);

AmplitudeCoeffs compute_amplitude_coeffs(const FourierSymbol& sym,
                                         const CriticalData& crit,
                                         const NonlinearitySpec& spec,
                                         const PsiCorrections& psi);

struct DarcyReduction {
    Complex ctilde;      // scalar case: c - d h / f
    Complex deltaA;      // -1/4 V1 . F^-1 Pi0 Qt(r, conj r)
    Vec B_closure_coeff; // B = B0 - |A|^2 * B_closure_coeff
};

/// Darcy closure (F B + H |A|^2)_x = 0. Throws SingularF when F_mat is
/// singular on range Pi0 (compatible case, closure undefined).
DarcyReduction darcy_reduce(const AmplitudeCoeffs& coeffs);

/// Scalar helper used by the stability module: ctilde = c - d h / f.
Complex darcy_ctilde_scalar(Complex c, Complex d, Real f, Real h);

struct ResidualSample {
    Real eps;
    Real mode1_l;     // |l . Rhat(mode 1)| / eps
    Real mode0_pi0;   // |Pi0 Rhat(0)|
    Real mode0_full;  // |Rhat(0)|
};

struct ResidualReport {
    std::vector<ResidualSample> samples;
    Real mode1_slope = 0;   // log-log fit across eps
};

struct ResidualOracleOptions {
    Real kappa = 0.2;       // slow wavenumber of the exponential solution
    Vec beta;               // mean-mode offset (in range Pi0); empty = 0
    int grid_points = 256;
    Real min_slope = 2.7;   // threshold below which SlopeTooShallow is thrown
    bool throw_on_shallow = false;
};

/// Builds the modulation ansatz through the Psi_2 terms on an exponential
/// amplitude solution, evaluates dU/dt - L(mu)U - N(U) spectrally, and
/// reports the l-projected mode-1 residual (normalized by eps) per eps.
/// Independent of the coefficient-assembly path: arbitration oracle.
ResidualReport residual_oracle(const FourierSymbol& sym, const NonlinearitySpec& spec,
                               const CriticalData& crit, const AmplitudeCoeffs& coeffs,
                               const PsiCorrections& psi, const std::vector<Real>& eps_list,
                               const ResidualOracleOptions& opt = {});

} // namespace convamp
