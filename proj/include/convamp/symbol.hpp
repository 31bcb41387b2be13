#pragma once

#include <string>
#include <utility>
#include <vector>

#include "convamp/types.hpp"

namespace convamp {

/// Matrix symbol S(k,mu) = sum_j (ik)^j L_j(mu) of a conservation-law system,
/// with affine parameter dependence L_j(mu) = L_j0 + mu*L_j1.
struct FourierSymbol {
    int order = 0;              // m, highest derivative
    int dim = 0;                // n, number of components
    int conserved_rank = 0;     // r, dim ker L_0(mu)
    std::vector<std::pair<Mat, Mat>> coeffs;  // coeffs[j] = (L_j0, L_j1)

    Mat lj(int j, Real mu) const { return coeffs[j].first + mu * coeffs[j].second; }

    MatC eval(Real k, Real mu) const;
    MatC d_k(Real k, Real mu) const;
    MatC d_kk(Real k, Real mu) const;
    MatC d_mu(Real k, Real mu) const;
};

MatC eval_symbol(const FourierSymbol& sym, Real k, Real mu);

/// Spectral projection onto ker L_0(mu); idempotent, rank r.
/// Throws KernelRankMismatch if the numerical kernel dimension differs from
/// the declared conserved_rank or 0 is not semisimple.
Mat kernel_projection(const FourierSymbol& sym, Real mu);

/// Solve (I - r l) M v = (I - r l) w with l v = 0 via the bordered system
/// [M r; l 0]. This is the reduced inverse on the complement of the oblique
/// rank-one projection r l (Moore-Penrose would be wrong for oblique
/// projections).
VecC reduced_solve(const MatC& M, const VecC& r, const RowVecC& l, const VecC& w);

/// Reduced inverse on range(I - P) for a general (possibly oblique, any rank)
/// projection P: solves (I-P) M v = (I-P) w with P v = 0.
VecC reduced_solve(const MatC& M, const MatC& P, const VecC& w);

struct HypothesisItem {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisItem> items;
    bool all_passed() const;
    std::string summary() const;
};

/// Evaluate Turing-hypothesis checks on sampled grids. Failures are report
/// entries, never exceptions.
HypothesisReport check_hypotheses(const FourierSymbol& sym,
                                  const std::vector<Real>& k_grid,
                                  const std::vector<Real>& mu_grid);

} // namespace convamp
