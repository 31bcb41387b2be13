#pragma once

#include <vector>

#include "convamp/types.hpp"

namespace convamp {

/// One term c * prod_i d^{a_i} u_{comp_i} of a polynomial nonlinearity row.
struct Monomial {
    Real coeff = 0;
    std::vector<std::pair<int, int>> factors;  // (component index, derivative order)
    int degree() const { return static_cast<int>(factors.size()); }
};

/// Quasilinear polynomial nonlinearity N(U) = M(dx) Ntilde(U), where M(dx)
/// applies an outer d/dx on conservation-law rows and the identity elsewhere.
/// Rows of Ntilde are sums of degree-2 and degree-3 monomials in U and its
/// derivatives up to order m-1.
struct NonlinearitySpec {
    std::vector<std::vector<Monomial>> rows;  // per output component
    std::vector<bool> conserved_outer;        // true exactly on range-Pi0 rows

    int dim() const { return static_cast<int>(rows.size()); }
};

/// Outer factor M(ik) as a diagonal matrix: conserved rows get ik, free rows 1.
MatC outer_factor(const NonlinearitySpec& spec, Complex ik);

/// Symmetric bilinear multiplier Q(eta1, eta2) of the quadratic part of
/// Ntilde at physical frequencies: a degree-2 monomial c (d^a u_i)(d^b u_j)
/// in row p contributes c/2 [ (i eta1)^a x_i (i eta2)^b y_j
///                           + (i eta2)^a y_i (i eta1)^b x_j ].
/// Frequencies are physical (k*eta), not integer modes. The multiplier of
/// D^2 Ntilde(0) is 2*Q.
VecC multiplier_Q(const NonlinearitySpec& spec, Real eta1, Real eta2,
                  const VecC& x, const VecC& y);

/// -i d/d(eta1) of multiplier_Q.
VecC multiplier_Qnu(const NonlinearitySpec& spec, Real eta1, Real eta2,
                    const VecC& x, const VecC& y);

/// Fully symmetrized trilinear multiplier of the cubic part of Ntilde at
/// physical frequencies. The multiplier of D^3 Ntilde(0) is 6*C.
VecC multiplier_C(const NonlinearitySpec& spec, Real eta1, Real eta2, Real eta3,
                  const VecC& x, const VecC& y, const VecC& z);

/// Q with the outer factor M(i(eta1+eta2)) applied (conserved rows only).
VecC multiplier_MQ(const NonlinearitySpec& spec, Real eta1, Real eta2,
                   const VecC& x, const VecC& y);

/// Pointwise evaluation of Ntilde on sampled fields (columns = components,
/// rows = grid points); derivative factors are supplied pre-computed as
/// derivs[a] holding d^a U.
Mat eval_ntilde(const NonlinearitySpec& spec, const std::vector<Mat>& derivs);

} // namespace convamp
