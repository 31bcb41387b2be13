#include "convamp/critical.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <sstream>

#include "convamp/errors.hpp"

namespace convamp {

namespace {

Real max_real_spec(const MatC& m) {
    Eigen::ComplexEigenSolver<MatC> es(m, false);
    return es.eigenvalues().real().maxCoeff();
}

struct EigPair {
    Complex lambda;
    VecC r;
    RowVecC l;
};

// eigen-pair of the eigenvalue with largest real part, normalized l r = 1
// and l scaled so its last entry of largest modulus is 1
EigPair leading_pair(const MatC& S) {
    Eigen::ComplexEigenSolver<MatC> es(S, true);
    int idx = 0;
    es.eigenvalues().real().maxCoeff(&idx);
    EigPair p;
    p.lambda = es.eigenvalues()(idx);
    p.r = es.eigenvectors().col(idx);
    Eigen::ComplexEigenSolver<MatC> esl(S.adjoint(), true);
    int jdx = 0;
    VecC dl = esl.eigenvalues().conjugate().array() - p.lambda;
    dl.cwiseAbs().minCoeff(&jdx);
    p.l = esl.eigenvectors().col(jdx).adjoint();
    // rescale l so its last nonzero entry is 1, then fix r by l r = 1
    int last = static_cast<int>(p.l.size()) - 1;
    while (last > 0 && std::abs(p.l(last)) < 1e-12 * p.l.norm()) --last;
    p.l /= p.l(last);
    p.r /= (p.l * p.r)(0, 0);
    return p;
}

} // namespace

Complex spectral_curvature(const MatC& M0, const MatC& M1, const MatC& M2,
                           const VecC& r, const RowVecC& l) {
    const VecC nw = reduced_solve(M0, r, l.transpose(), M1 * r);
    const Complex term1 = (l * M2 * r)(0, 0);
    const Complex term2 = (l * M1 * nw)(0, 0);
    return 2.0 * (term1 - term2);
}

CriticalData find_critical(const FourierSymbol& sym, const FindCriticalOptions& opt) {
    // coarse scan of g(k) = max Re spec S(k,0)
    auto g = [&](Real k) { return max_real_spec(sym.eval(k, 0.0)); };

    Real kmax = opt.k_max;
    if (kmax <= 0) {
        // guess: scan outwards until g decays well below its max
        Real kg = 1.0, gbest = -1e300, arg = 1.0;
        for (int i = 1; i <= 400; ++i) {
            Real k = 8.0 * i / 400.0;
            Real v = g(k);
            if (v > gbest) { gbest = v; arg = k; }
            kg = k;
        }
        (void)kg;
        kmax = 4.0 * arg;
    }

    const int npts = opt.scan_points;
    std::vector<Real> gv(npts + 1);
    Real gmax = -1e300;
    int imax = 0;
    for (int i = 1; i <= npts; ++i) {
        gv[i] = g(kmax * Real(i) / npts);
        if (gv[i] > gmax) { gmax = gv[i]; imax = i; }
    }
    if (gmax < -1e-6) throw NoCriticalPoint("max Re spec S(k,0) stays negative over the scan");
    if (gmax > 1e-4) {
        // spectrum crosses zero: count sign-change clusters with gap > 10 cells
        int clusters = 0, last_end = -1000000;
        bool in = false;
        for (int i = 1; i <= npts; ++i) {
            bool pos = gv[i] > 0;
            if (pos && !in) {
                if (i - last_end > 10) ++clusters;
                in = true;
            }
            if (!pos && in) { in = false; last_end = i; }
        }
        if (clusters > 1) throw MultipleCriticalPoints("more than one marginal cluster");
    }

    // bracket the peak, then polish: ternary on g down to the quadratic-peak
    // noise floor, followed by secant on the analytic branch derivative
    // Re(l S_k r), which crosses zero linearly at k*
    Real a = kmax * Real(std::max(1, imax - 2)) / npts;
    Real b = kmax * Real(std::min(npts, imax + 2)) / npts;
    for (int it = 0; it < 80; ++it) {
        if (b - a < 1e-7) break;
        Real m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
        if (g(m1) < g(m2)) a = m1; else b = m2;
    }
    Real k_star = 0.5 * (a + b);
    {
        auto dre = [&](Real k) {
            EigPair p = leading_pair(sym.eval(k, 0.0));
            return ((p.l * sym.d_k(k, 0.0) * p.r)(0, 0)).real();
        };
        Real k0 = k_star - 1e-6, k1 = k_star + 1e-6;
        Real f0 = dre(k0), f1 = dre(k1);
        for (int it = 0; it < 60; ++it) {
            if (std::abs(f1 - f0) < 1e-300) break;
            const Real k2 = k1 - f1 * (k1 - k0) / (f1 - f0);
            k0 = k1;
            f0 = f1;
            k1 = k2;
            f1 = dre(k1);
            if (std::abs(k1 - k0) < opt.root_tol) break;
        }
        if (std::isfinite(k1) && std::abs(k1 - k_star) < 1e-3) k_star = k1;
    }

    const MatC S = sym.eval(k_star, 0.0);
    // simplicity: no second eigenvalue near the axis
    {
        Eigen::ComplexEigenSolver<MatC> es(S, false);
        const Real scale = std::max(S.norm(), Real(1.0));
        int close = 0;
        Real top = es.eigenvalues().real().maxCoeff();
        for (int i = 0; i < sym.dim; ++i) {
            if (es.eigenvalues()(i).real() > top - opt.collision_tol * scale &&
                es.eigenvalues()(i).real() > -1e-3 * scale)
                ++close;
        }
        if (close != 1) throw NonSimpleCritical("two eigenvalues near the axis at k*");
    }

    EigPair p = leading_pair(S);
    CriticalData out;
    out.k_star = k_star;
    out.lambda = p.lambda;
    out.r_vec = p.r;
    out.l_vec = p.l;
    out.lambda_k = (p.l * sym.d_k(k_star, 0.0) * p.r)(0, 0);
    out.lambda_mu = (p.l * sym.d_mu(k_star, 0.0) * p.r)(0, 0);
    out.lambda_kk = spectral_curvature(S - p.lambda * MatC::Identity(sym.dim, sym.dim),
                                       sym.d_k(k_star, 0.0), 0.5 * sym.d_kk(k_star, 0.0),
                                       p.r, p.l);
    out.d_star = -out.lambda.imag() / k_star;
    out.delta = -out.lambda_k.imag() - out.d_star;
    return out;
}

std::array<Real, 4> example_family_cubic(Real c1, Real c2) {
    const Real w = c1 - 2 * c2;
    return {48.0, 56.0 - w * w - 4 * c2 * w, 19.0 + c2 * (2 * c2 - c1), 2.0};
}

namespace {

Real cubic_discriminant(const std::array<Real, 4>& p) {
    const Real a = p[0], b = p[1], c = p[2], d = p[3];
    return 18 * a * b * c * d - 4 * b * b * b * d + b * b * c * c - 4 * a * c * c * c
           - 27 * a * a * d * d;
}

// double root of a cubic with vanishing discriminant
Real cubic_double_root(const std::array<Real, 4>& p) {
    const Real a = p[0], b = p[1], c = p[2], d = p[3];
    return (9 * a * d - b * c) / (2 * (b * b - 3 * a * c));
}

} // namespace

ExampleFamilyPoint solve_example_family(Real c1_seed, Real c2_seed) {
    // Newton on (Delta(c1,c2), c2^2 - 3/2); the second equation pins the
    // family point printed for the example model (its c2 is sqrt(3/2) to
    // machine precision).
    Real c1 = c1_seed, c2 = c2_seed;
    auto F = [](Real x1, Real x2) -> std::array<Real, 2> {
        return {cubic_discriminant(example_family_cubic(x1, x2)) * 1e-6, x2 * x2 - 1.5};
    };
    bool converged = false;
    for (int it = 0; it < 60; ++it) {
        auto f = F(c1, c2);
        if (std::abs(f[0]) < 1e-12 && std::abs(f[1]) < 1e-14) { converged = true; break; }
        const Real h = 1e-7;
        auto f1 = F(c1 + h, c2);
        auto f2 = F(c1, c2 + h);
        const Real j11 = (f1[0] - f[0]) / h, j12 = (f2[0] - f[0]) / h;
        const Real j21 = (f1[1] - f[1]) / h, j22 = (f2[1] - f[1]) / h;
        const Real det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14) throw NoConvergence("singular Jacobian in family Newton");
        const Real d1 = (f[0] * j22 - f[1] * j12) / det;
        const Real d2 = (j11 * f[1] - j21 * f[0]) / det;
        c1 -= d1;
        c2 -= d2;
        if (!std::isfinite(c1) || !std::isfinite(c2))
            throw NoConvergence("family Newton diverged");
    }
    if (!converged) throw NoConvergence("family Newton did not converge");

    const Real x = cubic_double_root(example_family_cubic(c1, c2));
    if (x <= 0) throw NegativeDoubleRoot("double root of the marginal cubic is not positive");

    ExampleFamilyPoint out;
    out.c1 = c1;
    out.c2 = c2;
    out.k_star = std::sqrt(x);
    const Real h = 1e-5;
    out.delta_mu0 = (cubic_discriminant(example_family_cubic(c1 + h, c2))
                     - cubic_discriminant(example_family_cubic(c1 - h, c2))) / (2 * h);
    return out;
}

} // namespace convamp
