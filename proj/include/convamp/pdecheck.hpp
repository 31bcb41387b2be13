#pragma once

#include <limits>
#include <vector>

#include "convamp/amplitude.hpp"
#include "convamp/critical.hpp"
#include "convamp/nonlinearity.hpp"
#include "convamp/stability.hpp"
#include "convamp/symbol.hpp"
#include "convamp/types.hpp"

namespace convamp {

/// Small-amplitude periodic traveling wave of the full system, as truncated
/// Fourier modes of the 2pi-periodic profile in xi = k x.
struct TravelingWave {
    Real eps = 0;
    Real kappa_tilde = 0;  // k = k_* + eps * kappa_tilde
    Vec beta;              // mean offset, range Pi0 coordinates
    int trunc = 32;        // M
    std::vector<VecC> modes;  // index 0..2M <-> frequency -M..M
    Real speed = 0;           // d
    Real residual_norm = 0;
    Real alpha_pred = 0;      // predictor amplitude from the reduced equation
    std::vector<Real> newton_history;  // residual norms per iteration

    const VecC& mode(int eta) const { return modes[eta + trunc]; }
    VecC& mode(int eta) { return modes[eta + trunc]; }
};

struct NewtonOptions {
    int max_iter = 25;
    Real tol = 1e-11;
    int trunc = 32;
};

/// Newton continuation from the reduced-equation predictor.
/// Throws PredictorInvalid (alpha^2 <= 0) or NewtonDiverged.
TravelingWave newton_wave(const FourierSymbol& sym, const NonlinearitySpec& spec,
                          const CriticalData& crit, const PsiCorrections& psi,
                          const AmplitudeCoeffs& coeffs, Real eps, Real kappa_tilde,
                          const Vec& beta, const NewtonOptions& opt = {});

/// Fourier-mode residual of L(k,mu)U + d k dxi U + N(U,k,mu) for an arbitrary
/// iterate (frequencies -M..M). The conserved rows of the mode-0 entry vanish
/// identically by the divergence structure.
std::vector<VecC> traveling_wave_residual(const FourierSymbol& sym,
                                          const NonlinearitySpec& spec,
                                          const TravelingWave& wave, Real k, Real mu);

struct BlochSample {
    Real sigma = 0;
    MatC matrix;                 // n(2M+1) x n(2M+1)
    std::vector<Complex> small;  // eigenvalues near 0 (the N+2 smallest)
};

/// Assemble the Bloch matrix L(k,mu;sigma) + d k dxi + i sigma C + D_U N(u~;sigma)
/// in the truncated Fourier basis. C defaults to k_*(d_*+delta) at kappa_tilde=0
/// (the kappa -> 0 limit of the paper's constant) unless overridden.
BlochSample bloch_matrix(const FourierSymbol& sym, const NonlinearitySpec& spec,
                         const CriticalData& crit, const TravelingWave& wave,
                         Real sigma, Real C_override = std::numeric_limits<Real>::quiet_NaN());

/// All eigenvalues of the Bloch matrix at the given exponent.
VecC bloch_eigenvalues(const FourierSymbol& sym, const NonlinearitySpec& spec,
                       const CriticalData& crit, const TravelingWave& wave, Real sigma);

struct SpectralMatchRow {
    Real sigma;
    std::vector<Complex> bloch;    // N+2 small Bloch eigenvalues, matched order
    std::vector<Complex> reduced;  // eigenvalues of the reduced-example matrix
    Real mismatch;                 // max |bloch - reduced| / eps^2 over the row
};

struct SpectralMatchReport {
    std::vector<SpectralMatchRow> rows;
    Real max_mismatch = 0;  // over the sigma grid, scaled by eps^-2
    Real sigma0_gap = 0;    // relative error of the stable small eigenvalue at sigma=0
};

/// Compare the small Bloch eigenvalues against the reduced-example matrix,
/// identifying alpha with the computed wave amplitude and alpha_1 with its
/// eps-derivative (finite differences of newton_wave).
SpectralMatchReport spectral_match(const FourierSymbol& sym, const NonlinearitySpec& spec,
                                   const CriticalData& crit, const PsiCorrections& psi,
                                   const AmplitudeCoeffs& coeffs, const TravelingWave& wave,
                                   const std::vector<Real>& sigma_grid);

} // namespace convamp
