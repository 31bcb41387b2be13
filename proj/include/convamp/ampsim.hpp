#pragma once

#include <functional>
#include <vector>

#include "convamp/stability.hpp"
#include "convamp/types.hpp"

namespace convamp {

/// Periodic grids of the complex amplitude A and the real mean mode B.
struct FieldState {
    Real length = 2 * M_PI;  // domain [0, L)
    int points = 256;        // power of two
    VecC A;
    Vec B;                   // r = 1
    Real time = 0;
    Real eps = 1e-2;
    StabilityModel model = StabilityModel::Truncated;

    Real dx() const { return length / points; }
};

struct StepOptions {
    bool exact_forcing = true;  // integrate the eps^-1 h |A|^2_X forcing along
                                // characteristics (per-mode Duhamel weight);
                                // if false, step it explicitly and enforce
                                // dt <= 0.5 eps dx / |h|
};

/// One second-order IMEX step: the linear advective-diffusive symbol is
/// integrated exactly per Fourier mode, nonlinear terms by exponential
/// midpoint with 2/3-rule dealiasing.
/// Throws BlowupDetected / NonFiniteValue.
FieldState step(const FieldState& state, const ScalarCoeffs& coeffs, Real dt,
                const StepOptions& opt = {});

struct EnergyDiagnostics {
    Real H1_A = 0;       // ||A||_{H^1}^2
    Real L2_Btilde = 0;  // ||B + |A|^2||_{L^2}^2
    Real E = 0;          // (H1_A + L2_Btilde) / 2
    Real mass_B = 0;     // integral of B
};

EnergyDiagnostics energy(const FieldState& state);

struct TrajectoryPoint {
    Real time;
    Real A_l2;
    Real A_h1;
    Real B_l2;
    Real mass_B;
    Real E;
};

struct TrajectorySummary {
    std::vector<TrajectoryPoint> series;
    FieldState final_state;
};

using Observer = std::function<void(const FieldState&)>;

TrajectorySummary simulate(const FieldState& state, const ScalarCoeffs& coeffs,
                           Real T_final, Real dt, int observe_stride = 10,
                           const Observer& extra = {}, const StepOptions& opt = {});

struct DarcyTrajectory {
    std::vector<Real> times;
    std::vector<Real> B0_series;
    std::vector<Real> massB_series;
    FieldState final_state;   // A field plus reconstructed B
};

/// Step the Darcy-reduced cGL together with the B0 compatibility ODE (whose
/// right side integrates exactly to the torus average of |A|^2), and
/// reconstruct B from the closure. Throws SingularF when f = 0.
DarcyTrajectory darcy_run(const ScalarCoeffs& coeffs, const VecC& A_init, Real length,
                          Real B0_init, Real eps, Real T_final, Real dt);

/// L^2, H^1 norms on the periodic grid (spectral derivative for H^1).
Real norm_l2(const VecC& f, Real length);
Real norm_h1(const VecC& f, Real length);

} // namespace convamp
