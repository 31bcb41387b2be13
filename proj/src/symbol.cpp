#include "convamp/symbol.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "convamp/errors.hpp"

namespace convamp {

MatC FourierSymbol::eval(Real k, Real mu) const {
    MatC s = MatC::Zero(dim, dim);
    Complex ik_pow{1.0, 0.0};
    for (int j = 0; j <= order; ++j) {
        s += ik_pow * lj(j, mu).cast<Complex>();
        ik_pow *= I * k;
    }
    return s;
}

MatC FourierSymbol::d_k(Real k, Real mu) const {
    MatC s = MatC::Zero(dim, dim);
    for (int j = 1; j <= order; ++j) {
        s += Real(j) * std::pow(I * k, j - 1) * I * lj(j, mu).cast<Complex>();
    }
    return s;
}

MatC FourierSymbol::d_kk(Real k, Real mu) const {
    MatC s = MatC::Zero(dim, dim);
    for (int j = 2; j <= order; ++j) {
        s += Real(j * (j - 1)) * std::pow(I * k, j - 2) * (I * I) * lj(j, mu).cast<Complex>();
    }
    return s;
}

MatC FourierSymbol::d_mu(Real k, Real mu) const {
    (void)mu;
    MatC s = MatC::Zero(dim, dim);
    for (int j = 0; j <= order; ++j) {
        s += std::pow(I * k, j) * coeffs[j].second.cast<Complex>();
    }
    return s;
}

MatC eval_symbol(const FourierSymbol& sym, Real k, Real mu) { return sym.eval(k, mu); }

Mat kernel_projection(const FourierSymbol& sym, Real mu) {
    const Mat L0 = sym.lj(0, mu);
    const int n = sym.dim;
    const int r = sym.conserved_rank;
    if (r == n) return Mat::Identity(n, n);

    const Real scale = std::max(L0.norm(), Real(1.0));
    const Real tol = 1e-9 * scale;

    Eigen::JacobiSVD<Mat> svd_r(L0, Eigen::ComputeFullV);
    Eigen::JacobiSVD<Mat> svd_l(L0.transpose(), Eigen::ComputeFullV);
    int null_dim = 0;
    for (int i = 0; i < n; ++i)
        if (svd_r.singularValues()(i) < tol) ++null_dim;
    if (null_dim != r) {
        std::ostringstream os;
        os << "kernel dimension " << null_dim << " != declared rank " << r;
        throw KernelRankMismatch(os.str());
    }
    Mat K = svd_r.matrixV().rightCols(r);             // right kernel basis
    Mat Lb = svd_l.matrixV().rightCols(r);            // left kernel basis
    Mat cross = Lb.transpose() * K;                   // r x r
    Eigen::FullPivLU<Mat> lu(cross);
    if (!lu.isInvertible())
        throw KernelRankMismatch("0 is not a semisimple eigenvalue of L0");
    return K * lu.solve(Lb.transpose());              // K (Lb^T K)^-1 Lb^T
}

VecC reduced_solve(const MatC& M, const VecC& r, const RowVecC& l, const VecC& w) {
    const int n = static_cast<int>(r.size());
    MatC A(n + 1, n + 1);
    A.topLeftCorner(n, n) = M;
    A.topRightCorner(n, 1) = r;
    A.bottomLeftCorner(1, n) = l;
    A(n, n) = Complex(0, 0);
    VecC rhs(n + 1);
    rhs.head(n) = w;
    rhs(n) = Complex(0, 0);
    Eigen::FullPivLU<MatC> lu(A);
    if (!lu.isInvertible()) throw SingularComplement("bordered reduced solve is singular");
    return lu.solve(rhs).head(n);
}

VecC reduced_solve(const MatC& M, const MatC& P, const VecC& w) {
    const int n = static_cast<int>(P.rows());
    // rank-revealing factorization of P: P = B C with B n x r
    Eigen::FullPivLU<MatC> plu(P);
    const int r = static_cast<int>(plu.rank());
    if (r == 0) {
        Eigen::FullPivLU<MatC> lu(M);
        if (!lu.isInvertible()) throw SingularComplement("reduced block singular");
        return lu.solve(w);
    }
    if (r == n) return VecC::Zero(n);
    MatC B = plu.image(P);                 // n x r basis of range(P)
    // rows of P span the co-range: take a basis of range(P^T)
    Eigen::FullPivLU<MatC> plt(MatC(P.transpose()));
    MatC Lrows = plt.image(MatC(P.transpose())).transpose();  // r x n
    MatC A(n + r, n + r);
    A.setZero();
    A.topLeftCorner(n, n) = M;
    A.topRightCorner(n, r) = B;
    A.bottomLeftCorner(r, n) = Lrows;
    VecC rhs = VecC::Zero(n + r);
    rhs.head(n) = w;
    Eigen::FullPivLU<MatC> lu(A);
    if (!lu.isInvertible()) throw SingularReducedBlock("reduced block singular on complement");
    return lu.solve(rhs).head(n);
}

bool HypothesisReport::all_passed() const {
    return std::all_of(items.begin(), items.end(),
                       [](const HypothesisItem& it) { return it.passed; });
}

std::string HypothesisReport::summary() const {
    std::ostringstream os;
    for (const auto& it : items)
        os << (it.passed ? "[pass] " : "[FAIL] ") << it.name << ": " << it.detail << "\n";
    return os.str();
}

namespace {

Real max_real_spec(const MatC& m) {
    Eigen::ComplexEigenSolver<MatC> es(m, false);
    return es.eigenvalues().real().maxCoeff();
}

// restrict a matrix T to range(P): columns of an orthonormal basis of range(P)
MatC restrict_to_range(const MatC& T, const Mat& P) {
    Eigen::ColPivHouseholderQR<Mat> qr(P);
    const int r = static_cast<int>(qr.rank());
    Mat Q = qr.householderQ();
    Mat basis = Q.leftCols(r);
    return basis.transpose().cast<Complex>() * T * basis.cast<Complex>();
}

} // namespace

HypothesisReport check_hypotheses(const FourierSymbol& sym,
                                  const std::vector<Real>& k_grid,
                                  const std::vector<Real>& mu_grid) {
    HypothesisReport rep;
    const int n = sym.dim;
    auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        rep.items.push_back({name, ok, detail});
    };

    // 1. reality: S(k,mu) = conj(S(-k,mu))
    {
        Real worst = 0;
        for (Real mu : mu_grid)
            for (Real k : k_grid)
                worst = std::max(worst, (sym.eval(k, mu) - sym.eval(-k, mu).conjugate()).norm());
        std::ostringstream os;
        os << "max |S(k,mu) - conj(S(-k,mu))| = " << worst;
        add("reality", worst < 1e-12, os.str());
    }

    // 2. kernel rank r and mu-independence of Pi0
    Mat Pi0;
    {
        bool ok = true;
        std::string detail;
        try {
            Pi0 = kernel_projection(sym, 0.0);
            Real drift = 0;
            for (Real mu : mu_grid) {
                Mat P = kernel_projection(sym, mu);
                drift = std::max(drift, (P - Pi0).norm());
            }
            std::ostringstream os;
            os << "rank " << sym.conserved_rank << ", max |Pi0(mu)-Pi0(0)| = " << drift;
            detail = os.str();
            ok = drift < 1e-8;
        } catch (const KernelRankMismatch& e) {
            ok = false;
            detail = e.what();
            Pi0 = Mat::Zero(n, n);
        }
        add("kernel rank and constant Pi0", ok, detail);
    }

    // 3. strict stability for mu < 0
    {
        Real worst = -1e300;
        bool any = false;
        for (Real mu : mu_grid) {
            if (mu >= 0) continue;
            any = true;
            for (Real k : k_grid)
                if (k > 0) worst = std::max(worst, max_real_spec(sym.eval(k, mu)));
            const MatC L0c = sym.lj(0, mu).cast<Complex>();
            worst = std::max(worst, max_real_spec(L0c) - 1e-10);
        }
        std::ostringstream os;
        os << "max Re spec over sampled mu<0, k>0: " << (any ? worst : 0.0);
        add("stability for mu < 0", !any || worst < 0, os.str());
    }

    // 4. unique simple marginal wavenumber at mu = 0
    Real kstar_guess = 0;
    {
        Real kmax = 0;
        for (Real k : k_grid) kmax = std::max(kmax, std::abs(k));
        if (kmax <= 0) kmax = 4.0;
        const int npts = 2000;
        std::vector<int> touching;
        Real gmax = -1e300;
        int arg = -1;
        Real prev_g = -1;
        bool in_cluster = false;
        int last_cluster_end = -1000000;
        int clusters = 0;
        for (int i = 1; i <= npts; ++i) {
            Real k = kmax * Real(i) / npts;
            Real g = max_real_spec(sym.eval(k, 0.0));
            if (g > gmax) { gmax = g; arg = i; kstar_guess = k; }
            bool touch = g > -1e-7;
            if (touch && !in_cluster) {
                if (i - last_cluster_end > 10) ++clusters;
                in_cluster = true;
            }
            if (!touch && in_cluster) { in_cluster = false; last_cluster_end = i; }
            prev_g = g;
        }
        (void)prev_g; (void)arg;
        // polish the marginal wavenumber before the derivative checks
        if (kstar_guess > 0) {
            Real a = std::max(kstar_guess - 2 * kmax / npts, 1e-8);
            Real b = kstar_guess + 2 * kmax / npts;
            auto gk = [&](Real k) { return max_real_spec(sym.eval(k, 0.0)); };
            for (int it = 0; it < 120 && b - a > 1e-13; ++it) {
                const Real m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
                if (gk(m1) < gk(m2)) a = m1; else b = m2;
            }
            kstar_guess = 0.5 * (a + b);
            gmax = gk(kstar_guess);
        }
        std::ostringstream os;
        os << "max_k Re spec S(k,0) = " << gmax << " near k = " << kstar_guess
           << ", marginal clusters = " << clusters;
        bool ok = std::abs(gmax) < 1e-6 && clusters == 1;
        // simplicity at the marginal point
        if (ok) {
            Eigen::ComplexEigenSolver<MatC> es(sym.eval(kstar_guess, 0.0), false);
            VecC ev = es.eigenvalues();
            int close = 0;
            for (int i = 0; i < n; ++i)
                if (ev(i).real() > -1e-4) ++close;
            if (close != 1) { ok = false; os << ", non-simple neutral eigenvalue"; }
        }
        add("unique simple marginal k*", ok, os.str());
    }

    // 5. sign conditions on the dispersion derivatives (local, at the scan point)
    Real dpd = 0;  // d* + delta = -Im lambda_k, reused by the transport check
    {
        bool ok = false;
        std::ostringstream os;
        if (kstar_guess > 0) {
            const MatC S = sym.eval(kstar_guess, 0.0);
            Eigen::ComplexEigenSolver<MatC> es(S, true);
            int idx = 0;
            es.eigenvalues().real().maxCoeff(&idx);
            VecC r = es.eigenvectors().col(idx);
            Eigen::ComplexEigenSolver<MatC> esl(S.adjoint(), true);
            int jdx = 0;
            VecC dl = esl.eigenvalues().conjugate().array() - es.eigenvalues()(idx);
            dl.cwiseAbs().minCoeff(&jdx);
            RowVecC l = esl.eigenvectors().col(jdx).adjoint();
            l /= l * r;
            Complex lam_k = l * sym.d_k(kstar_guess, 0.0) * r;
            Complex lam_mu = l * sym.d_mu(kstar_guess, 0.0) * r;
            // curvature by finite differences of the continued eigenvalue (cheap, local check)
            auto track = [&](Real k) {
                Eigen::ComplexEigenSolver<MatC> e2(sym.eval(k, 0.0), false);
                int best = 0;
                VecC dd = e2.eigenvalues().array() - es.eigenvalues()(idx);
                dd.cwiseAbs().minCoeff(&best);
                return e2.eigenvalues()(best);
            };
            const Real hk = 1e-4 * std::max(kstar_guess, 1.0);
            Complex lam_kk = (track(kstar_guess + hk) + track(kstar_guess - hk)
                              - 2.0 * es.eigenvalues()(idx)) / (hk * hk);
            ok = std::abs(lam_k.real()) < 1e-5 && lam_kk.real() < 0 && lam_mu.real() > 0;
            dpd = -lam_k.imag();
            os << "Re lam_k = " << lam_k.real() << ", Re lam_kk = " << lam_kk.real()
               << ", Re lam_mu = " << lam_mu.real();
        } else {
            os << "no marginal point located";
        }
        add("dispersion sign conditions", ok, os.str());
    }

    // 6. sector bound outside the critical set (sampled)
    {
        Real worst = -1e300;
        const Real kap0 = 0.25 * std::max(kstar_guess, Real(0.5));
        for (Real mu : mu_grid)
            for (Real k : k_grid) {
                if (k <= 0) continue;
                if (std::abs(k - kstar_guess) < kap0 || k < kap0) continue;
                worst = std::max(worst, max_real_spec(sym.eval(k, mu)));
            }
        std::ostringstream os;
        os << "max Re spec outside the critical set = " << worst;
        add("sector bound (sampled)", worst < -1e-6, os.str());
    }

    // 7. singular value growth ~ (1+k^2)^{m/2} (sampled)
    {
        Real lo = 1e300, hi = 0;
        for (Real mu : mu_grid)
            for (Real k : k_grid) {
                if (std::abs(k) < 2 * kstar_guess + 1) continue;
                Eigen::JacobiSVD<MatC> svd(sym.eval(k, mu));
                const Real w = std::pow(1 + k * k, sym.order / 2.0);
                lo = std::min(lo, svd.singularValues().minCoeff() / w);
                hi = std::max(hi, svd.singularValues().maxCoeff() / w);
            }
        std::ostringstream os;
        os << "sigma_min ratio >= " << lo << ", sigma_max ratio <= " << hi;
        add("ellipticity growth (sampled)", lo > 1e-8 && hi < 1e8 && lo <= hi, os.str());
    }

    // 8a. hyperbolicity of the co-moving conserved transport
    //     -i Pi0 S_k(0,mu) Pi0 + (d*+delta) Pi0 on range Pi0
    //     (the frame-invariant form; the pattern moves at speed d*+delta)
    {
        bool ok = true;
        Real max_im = 0, min_abs = 1e300;
        for (Real mu : mu_grid) {
            MatC T = restrict_to_range(-I * Pi0.cast<Complex>() * sym.d_k(0.0, mu)
                                               * Pi0.cast<Complex>()
                                           + dpd * Pi0.cast<Complex>(),
                                       Pi0);
            Eigen::ComplexEigenSolver<MatC> es(T, false);
            for (int i = 0; i < T.rows(); ++i) {
                max_im = std::max(max_im, std::abs(es.eigenvalues()(i).imag()));
                min_abs = std::min(min_abs, std::abs(es.eigenvalues()(i)));
            }
        }
        ok = max_im < 1e-8 && min_abs > 1e-8;
        std::ostringstream os;
        os << "max |Im| = " << max_im << ", min |eig| = " << min_abs;
        add("conserved transport hyperbolic", ok, os.str());
    }

    // 8b. positivity of the effective mean diffusion
    //     -1/2 [Pi0 S_kk(0,0) Pi0 - 2 Pi0 S_k(0,0) N0 S_k(0,0) Pi0] on range Pi0
    {
        bool ok = false;
        std::ostringstream os;
        try {
            const MatC S00 = sym.eval(0.0, 0.0);
            const MatC Skk = sym.d_kk(0.0, 0.0);
            const MatC Sk = sym.d_k(0.0, 0.0);
            const MatC P0c = Pi0.cast<Complex>();
            MatC inner = MatC::Zero(n, n);
            if (sym.conserved_rank < n) {
                for (int j = 0; j < n; ++j) {
                    VecC w = Sk * P0c.col(j);
                    // N0 = -reduced inverse of S(0,0) on range(I-Pi0)
                    VecC nw = -reduced_solve(S00, P0c, w);
                    inner.col(j) = Sk * nw;
                }
            }
            MatC Deff = restrict_to_range(-0.5 * (P0c * Skk * P0c - 2.0 * P0c * inner), Pi0);
            Eigen::ComplexEigenSolver<MatC> es(Deff, false);
            Real min_re = es.eigenvalues().real().minCoeff();
            ok = min_re > 0;
            os << "min Re spec of effective mean diffusion = " << min_re;
        } catch (const NumericalError& e) {
            os << e.what();
        }
        add("mean diffusion positive", ok, os.str());
    }

    return rep;
}

} // namespace convamp
