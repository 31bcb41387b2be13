#pragma once

#include "convamp/symbol.hpp"
#include "convamp/types.hpp"

namespace convamp {

/// Everything at the bifurcation point (k_*, mu=0).
struct CriticalData {
    Real k_star = 0;
    Complex lambda;     // neutral eigenvalue of S(k_*, 0)
    Complex lambda_k;   // l S_k r
    Complex lambda_kk;  // second derivative via the reduced-resolvent identity
    Complex lambda_mu;  // l S_mu r
    VecC r_vec;         // right eigenvector, normalized l r = 1
    RowVecC l_vec;      // left eigenvector, rescaled so its last nonzero entry is 1
    Real d_star = 0;    // k_* d_* = -Im lambda
    Real delta = 0;     // d_* + delta = -Im lambda_k
};

/// lambda''(0) for M(x) = M0 + x M1 + x^2 M2 with a simple eigenvalue at 0:
///   lambda'' = 2( l M2 r - l M1 (I-Pi) N (I-Pi) M1 r ),  Pi = r l.
/// Throws SingularComplement if (I-Pi) M0 (I-Pi) is singular on range(I-Pi).
Complex spectral_curvature(const MatC& M0, const MatC& M1, const MatC& M2,
                           const VecC& r, const RowVecC& l);

struct FindCriticalOptions {
    Real k_max = 0;       // 0: auto (4x the scan guess)
    int scan_points = 2000;
    Real root_tol = 1e-12;
    Real collision_tol = 1e-8;  // simplicity threshold, relative to ||S||
};

/// Locate k_* by coarse scan of g(k) = max Re spec S(k,0) followed by
/// bisection/secant polish, then fill in eigenvectors and derivatives.
CriticalData find_critical(const FourierSymbol& sym, const FindCriticalOptions& opt = {});

struct ExampleFamilyPoint {
    Real c1 = 0;
    Real c2 = 0;
    Real k_star = 0;
    Real delta_mu0 = 0;  // d/dmu of the cubic discriminant along c + mu(1,0)
};

/// Newton solve for the example-model parameter point: discriminant of the
/// degree-3-in-k^2 marginal-spectrum polynomial vanishes with a positive
/// double root.
ExampleFamilyPoint solve_example_family(Real c1_seed, Real c2_seed);

/// The degree-3 polynomial in x = k^2 whose positive double root is k_*^2,
/// as coefficients {a, b, c, d} of a x^3 + b x^2 + c x + d.
std::array<Real, 4> example_family_cubic(Real c1, Real c2);

} // namespace convamp
