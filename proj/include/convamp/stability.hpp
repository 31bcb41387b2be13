#pragma once

#include <vector>

#include "convamp/types.hpp"

namespace convamp {

/// Scalar (one conservation law) coefficient set of the amplitude system
///   A_T = a A_XX + b A + c |A|^2 A + d A B
///   B_T = eB B_XX + eps^-1 (f B + h |A|^2)_X + dX Re(g A conj(A_X)).
struct ScalarCoeffs {
    Complex a{1.0, 0.0};
    Complex b{1.0, 0.0};
    Complex c{-1.0, 0.0};
    Complex d{0.0, 0.0};
    Complex g{0.0, 0.0};
    Real eB = 0;
    Real f = 0;
    Real h = 0;
};

/// Exponential solution (A,B) = (alpha e^{i(kappa X - omega T)}, B0).
struct WaveParams {
    Real kappa = 0;
    Real B0 = 0;
    Real alpha = 0;
    Real omega = 0;
    Real kappaE2 = 0;   // existence band: kappa^2 <= kappaE2
};

/// Solve the nonlinear dispersion relation for (alpha, omega).
/// Throws OutsideExistenceBand / NegativeAmplitude.
WaveParams wave_family(const ScalarCoeffs& coeffs, Real kappa, Real B0);

enum class StabilityModel { Truncated, Hyperbolic, Darcy, ReducedExample };

/// Extra data the reduced-example (Bloch-comparison) matrix needs beyond the
/// scalar coefficients.
struct ReducedExampleData {
    Real k_star = 0;
    Real kappa_t = 0;     // tilde-kappa, k = k_* + eps*kappa_t
    Real alpha = 0;       // leading wave amplitude
    Real alpha1 = 0;      // d alpha / d eps
    Complex lambda_kk;
    Complex gamma;
    Complex V1;           // coupling functional on the conserved direction
    Real r1_sq = 0;       // |r_1|^2
    Real r2_sq = 0;       // |r_2|^2
    Complex v;            // coefficient of dx Re(A conj(A_x) v)
    Real C0 = 0;          // C(0,kappa)
    Real C0_eps = 0;      // C_eps(0,kappa)
};

struct StabilityMatrix {
    StabilityModel model = StabilityModel::Truncated;
    Real eps = 0;
    Real sigma = 0;
    MatC entries;  // (2+r) x (2+r); 2x2 for Darcy
};

/// Assemble -sigma^2 M2 + i sigma M1(eps) + M0 for the requested model.
StabilityMatrix build_M(const ScalarCoeffs& coeffs, const WaveParams& wave,
                        Real eps, Real sigma, StabilityModel model,
                        const ReducedExampleData* red = nullptr);

/// Small-sigma data of the two neutral eigenvalue branches of the truncated
/// (or hyperbolic) matrix, via exact reduction in the generalized eigenbasis.
struct NeutralExpansion {
    Real p = 0;           // -Re(d) / (2 A0 Re(c))
    Real q = 0;           // -Im(c) / Re(c)
    Complex F_eps;        // eigenvector mixing ratio F(eps)
    Complex lam_t1;       // first-order coefficient of the translational branch
    Complex lam_c1;       // first-order coefficient of the conserved branch
    Complex mu_t;         // second-order coefficient, translational
    Complex mu_c;         // second-order coefficient, conserved
    Real mu_c_leading = 0;  // eps^-2 closed form
};

/// Throws DegenerateDenominator when 2 A0 h p + f vanishes (the first-order
/// eigenvalues collide and the expansion breaks down).
NeutralExpansion neutral_expansion(const ScalarCoeffs& coeffs, const WaveParams& wave,
                                   Real eps);

struct DarcyExpansion {
    Complex C2;        // sigma^2 coefficient of the Darcy neutral branch,
                       // sign such that stability means Re C2 < 0
    Real kappaS2 = 0;  // Eckhaus band for the Darcy-modified Landau constant
    Complex ctilde;
};

DarcyExpansion darcy_expansion(const ScalarCoeffs& coeffs, const WaveParams& wave);

/// Eckhaus sideband boundary kappa_S^2 for A_T = a A_XX + b A + c |A|^2 A.
Real eckhaus_band(Complex a, Complex b, Complex c);

struct ScanRow {
    Real kappa;
    Real S;
    Real SD;
};

struct ScanOptions {
    Real rho = 0;          // 0: default 10*eps
    int sigma_points = 401;
    int kappa_points = 81;
    Real kappa_frac = 0.9; // scan |kappa| <= kappa_frac * kappa_E
};

/// S(kappa, rho) = sup_{|sigma|<=rho} max_j Re lambda_j(M(eps,sigma)) and the
/// Darcy counterpart S_D over |sigma| <= 1, on a symmetric kappa grid.
std::vector<ScanRow> scan_S(const ScalarCoeffs& coeffs, Real eps, Real rho,
                            const std::vector<Real>& kappa_grid);
std::vector<ScanRow> scan_stability(const ScalarCoeffs& coeffs, Real eps,
                                    const ScanOptions& opt = {});

struct BalanceReport {
    bool decoupled = false;        // coupling column vanishes (d = 0)
    bool jordan_first_order = false;
    Complex first_order_gap;       // lam_c1 - lam_t1
    Real sigma_radius = 0;         // estimated branch-separation radius
    Real eps = 0;
};

/// Diagnostic: reduce to the neutral 2-block, balance by T(sigma)=diag(sigma,1),
/// report whether the first-order matrix splits and the sigma-radius where the
/// branches stay separated.
BalanceReport balance_check(const ScalarCoeffs& coeffs, const WaveParams& wave, Real eps);

/// Eigenvalues tracked from sigma=0 by nearest-match continuation.
/// Column j of the result holds the branch continued from eigenvalue j at 0,
/// ordered (translational, conserved, stable) for the truncated model.
MatC track_branches(const ScalarCoeffs& coeffs, const WaveParams& wave, Real eps,
                    StabilityModel model, const std::vector<Real>& sigmas,
                    const ReducedExampleData* red = nullptr);

} // namespace convamp
