#include "convamp/pdecheck.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "convamp/errors.hpp"

namespace convamp {

namespace {

Mat range_basis(const Mat& P, int rank) {
    Eigen::ColPivHouseholderQR<Mat> qr(P);
    Mat Q = qr.householderQ();
    return Q.leftCols(rank);
}

int round_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

// physical profile and xi-derivatives (up to order m-1) of a truncated
// Fourier series on a fine grid
std::vector<Mat> profile_derivs(const std::vector<VecC>& modes, int M, int n,
                                int max_order, int Ng) {
    std::vector<Mat> derivs(std::max(1, max_order));
    for (int a = 0; a < std::max(1, max_order); ++a) derivs[a] = Mat::Zero(Ng, n);
    for (int g = 0; g < Ng; ++g) {
        const Real xi = 2 * M_PI * g / Ng;
        for (int eta = -M; eta <= M; ++eta) {
            const Complex e = std::exp(I * Real(eta) * xi);
            for (int a = 0; a < std::max(1, max_order); ++a) {
                const Complex w = std::pow(I * Real(eta), a) * e;
                for (int c = 0; c < n; ++c)
                    derivs[a](g, c) += (w * modes[eta + M](c)).real();
            }
        }
    }
    return derivs;
}

// Fourier coefficients of a real grid function, frequencies -K..K
std::vector<VecC> grid_coeffs(const Mat& F, int K) {
    const int Ng = static_cast<int>(F.rows());
    const int n = static_cast<int>(F.cols());
    Eigen::FFT<Real> fft;
    std::vector<VecC> out(2 * K + 1, VecC::Zero(n));
    for (int c = 0; c < n; ++c) {
        VecC col = F.col(c).cast<Complex>(), hat(Ng);
        fft.fwd(hat, col);
        hat /= Real(Ng);
        for (int d = -K; d <= K; ++d) out[d + K](c) = hat((d + Ng) % Ng);
    }
    return out;
}

struct Assembled {
    MatC B;  // n(2M+1) x n(2M+1)
};

// L(k,mu;sigma) + d k dxi + i sigma C + D_U N(u~; k,mu,sigma), truncated.
Assembled bloch_assemble(const FourierSymbol& sym, const NonlinearitySpec& spec,
                         const std::vector<VecC>& modes, int M, Real k, Real mu,
                         Real d, Real sigma, Real C) {
    const int n = sym.dim;
    const int nm = 2 * M + 1;
    Assembled out;
    out.B = MatC::Zero(n * nm, n * nm);

    for (int eta = -M; eta <= M; ++eta) {
        const int ii = n * (eta + M);
        out.B.block(ii, ii, n, n) = sym.eval(k * (eta + sigma), mu)
                                    + (d * k * I * Real(eta) + I * sigma * C)
                                          * MatC::Identity(n, n);
    }

    // derivative of the nonlinearity about the profile, as a convolution;
    // coefficient functions carry the physical factor k^a per xi-derivative
    const int Ng = round_pow2(8 * (M + 1));
    std::vector<Mat> derivs = profile_derivs(modes, M, n, sym.order, Ng);
    for (int a = 1; a < static_cast<int>(derivs.size()); ++a) derivs[a] *= std::pow(k, a);

    for (int p = 0; p < n; ++p) {
        for (const auto& mo : spec.rows[p]) {
            const int deg = mo.degree();
            for (int slot = 0; slot < deg; ++slot) {
                // coefficient function: product of the other factors
                Vec w = Vec::Constant(Ng, mo.coeff);
                for (int t = 0; t < deg; ++t) {
                    if (t == slot) continue;
                    w = w.cwiseProduct(derivs[mo.factors[t].second].col(mo.factors[t].first));
                }
                Mat wmat(Ng, 1);
                wmat.col(0) = w;
                std::vector<VecC> what = grid_coeffs(wmat, 2 * M);
                const int comp = mo.factors[slot].first;
                const int a = mo.factors[slot].second;
                for (int eta = -M; eta <= M; ++eta) {
                    const Complex outer = spec.conserved_outer[p]
                                              ? I * k * (eta + sigma)
                                              : Complex(1, 0);
                    for (int m = -M; m <= M; ++m) {
                        const int dd = eta - m;
                        if (dd < -2 * M || dd > 2 * M) continue;
                        const Complex deriv_fac = std::pow(I * k * (m + sigma), a);
                        out.B(n * (eta + M) + p, n * (m + M) + comp)
                            += outer * what[dd + 2 * M](0) * deriv_fac;
                    }
                }
            }
        }
    }
    return out;
}

// full residual of L(k,mu)U + d k dxi U + N(U,k,mu) = 0 in Fourier modes
std::vector<VecC> wave_residual(const FourierSymbol& sym, const NonlinearitySpec& spec,
                                const std::vector<VecC>& modes, int M, Real k, Real mu,
                                Real d) {
    const int n = sym.dim;
    const int Ng = round_pow2(8 * (M + 1));
    // N expects physical derivatives d/dx = k d/dxi
    std::vector<Mat> derivs = profile_derivs(modes, M, n, sym.order, Ng);
    for (int a = 1; a < static_cast<int>(derivs.size()); ++a) derivs[a] *= std::pow(k, a);
    Mat Nt = eval_ntilde(spec, derivs);
    std::vector<VecC> nhat = grid_coeffs(Nt, M);
    std::vector<VecC> res(2 * M + 1, VecC::Zero(n));
    for (int eta = -M; eta <= M; ++eta) {
        VecC v = sym.eval(k * eta, mu) * modes[eta + M]
                 + d * k * I * Real(eta) * modes[eta + M]
                 + outer_factor(spec, I * k * Real(eta)) * nhat[eta + M];
        res[eta + M] = v;
    }
    return res;
}

} // namespace

std::vector<VecC> traveling_wave_residual(const FourierSymbol& sym,
                                          const NonlinearitySpec& spec,
                                          const TravelingWave& wave, Real k, Real mu) {
    return wave_residual(sym, spec, wave.modes, wave.trunc, k, mu, wave.speed);
}

TravelingWave newton_wave(const FourierSymbol& sym, const NonlinearitySpec& spec,
                          const CriticalData& crit, const PsiCorrections& psi,
                          const AmplitudeCoeffs& coeffs, Real eps, Real kappa_tilde,
                          const Vec& beta, const NewtonOptions& opt) {
    const int n = sym.dim;
    const int r = sym.conserved_rank;
    const int M = opt.trunc;
    const Real mu = eps * eps;
    const Real k = crit.k_star + eps * kappa_tilde;
    const Mat B0 = range_basis(psi.Pi0, r);
    Mat B1;  // complement basis
    {
        Eigen::ColPivHouseholderQR<Mat> qr(Mat(Mat::Identity(n, n) - psi.Pi0));
        B1 = Mat(qr.householderQ()).leftCols(n - r);
    }
    Vec bet = beta.size() == r ? beta : Vec(Vec::Zero(r));

    // predictor from the reduced bifurcation equation
    Real v1beta = 0;
    for (int j = 0; j < r; ++j) v1beta += coeffs.V1(j).real() * bet(j);
    const Real alsq = -(crit.lambda_mu.real() + 0.5 * kappa_tilde * kappa_tilde
                            * crit.lambda_kk.real() + v1beta)
                      / coeffs.gamma.real();
    if (alsq <= 0) throw PredictorInvalid("predictor amplitude is not positive");
    const Real alpha0 = std::sqrt(alsq);

    TravelingWave w;
    w.eps = eps;
    w.kappa_tilde = kappa_tilde;
    w.beta = bet;
    w.trunc = M;
    w.alpha_pred = alpha0;
    w.modes.assign(2 * M + 1, VecC::Zero(n));
    w.mode(1) = 0.5 * eps * alpha0 * crit.r_vec;
    w.mode(-1) = w.mode(1).conjugate();
    w.mode(0) = (eps * eps * (B0 * bet)).cast<Complex>()
                + eps * eps * alsq * psi.psi0_coeff.cast<Complex>();
    w.mode(2) = 0.5 * eps * eps * alsq * psi.psi2_coeff;
    w.mode(-2) = w.mode(2).conjugate();
    w.speed = crit.d_star;

    const int nun = 2 * n * M + n + 1;  // Re/Im of modes 1..M, mode 0, d
    auto pack = [&](const TravelingWave& tw) {
        Vec x(nun);
        int ii = 0;
        for (int eta = 1; eta <= M; ++eta)
            for (int c = 0; c < n; ++c) {
                x(ii++) = tw.mode(eta)(c).real();
                x(ii++) = tw.mode(eta)(c).imag();
            }
        for (int c = 0; c < n; ++c) x(ii++) = tw.mode(0)(c).real();
        x(ii++) = tw.speed;
        return x;
    };
    auto unpack = [&](const Vec& x, TravelingWave& tw) {
        int ii = 0;
        for (int eta = 1; eta <= M; ++eta) {
            for (int c = 0; c < n; ++c) {
                tw.mode(eta)(c) = Complex(x(ii), x(ii + 1));
                ii += 2;
            }
            tw.mode(-eta) = tw.mode(eta).conjugate();
        }
        for (int c = 0; c < n; ++c) tw.mode(0)(c) = Complex(x(ii++), 0);
        tw.speed = x(ii++);
    };

    auto residual_vec = [&](const TravelingWave& tw) {
        std::vector<VecC> res = wave_residual(sym, spec, tw.modes, M, k, mu, tw.speed);
        Vec F(nun);
        int ii = 0;
        for (int eta = 1; eta <= M; ++eta)
            for (int c = 0; c < n; ++c) {
                F(ii++) = res[eta + M](c).real();
                F(ii++) = res[eta + M](c).imag();
            }
        // mode 0: free rows + mean constraints
        const VecC r0 = res[M];
        const Vec free_rows = (B1.transpose().cast<Complex>() * r0).real();
        for (int c = 0; c < n - r; ++c) F(ii++) = free_rows(c);
        const Vec mean = (B0.transpose().cast<Complex>() * tw.mode(0)).real()
                         - eps * eps * bet;
        for (int c = 0; c < r; ++c) F(ii++) = mean(c);
        // phase condition
        F(ii++) = (crit.l_vec * tw.mode(1)).imag()(0);
        return F;
    };

    Vec x = pack(w);
    Real fnorm = 1e300;
    std::vector<Real> history;
    for (int it = 0; it < opt.max_iter; ++it) {
        unpack(x, w);
        Vec F = residual_vec(w);
        fnorm = F.norm();
        history.push_back(fnorm);
        if (fnorm < opt.tol) break;
        if (!std::isfinite(fnorm) || fnorm > 1e6)
            throw NewtonDiverged("wave Newton residual diverged");

        // analytic Jacobian from the sigma = 0 linearization
        Assembled lin = bloch_assemble(sym, spec, w.modes, M, k, mu, w.speed, 0.0, 0.0);
        Mat J = Mat::Zero(nun, nun);
        auto block = [&](int eta, int m) {
            return lin.B.block(n * (eta + M), n * (m + M), n, n);
        };
        // rows: complex residuals for eta = 1..M
        int row = 0;
        for (int eta = 1; eta <= M; ++eta) {
            for (int c = 0; c < n; ++c) {
                // columns: modes 1..M (Re, Im)
                int col = 0;
                for (int m = 1; m <= M; ++m) {
                    for (int cc = 0; cc < n; ++cc) {
                        const Complex jp = block(eta, m)(c, cc);
                        const Complex jm = block(eta, -m)(c, cc);
                        J(row, col) = (jp + jm).real();
                        J(row + 1, col) = (jp + jm).imag();
                        J(row, col + 1) = (I * jp - I * jm).real();
                        J(row + 1, col + 1) = (I * jp - I * jm).imag();
                        col += 2;
                    }
                }
                for (int cc = 0; cc < n; ++cc) {
                    const Complex j0 = block(eta, 0)(c, cc);
                    J(row, col) = j0.real();
                    J(row + 1, col) = j0.imag();
                    ++col;
                }
                // d column
                const Complex dterm = k * I * Real(eta) * w.mode(eta)(c);
                J(row, col) = dterm.real();
                J(row + 1, col) = dterm.imag();
                row += 2;
            }
        }
        // mode-0 free rows
        for (int fr = 0; fr < n - r; ++fr) {
            const RowVecC lrow = B1.col(fr).transpose().cast<Complex>();
            int col = 0;
            for (int m = 1; m <= M; ++m) {
                for (int cc = 0; cc < n; ++cc) {
                    Complex jp(0, 0), jm(0, 0);
                    for (int c = 0; c < n; ++c) {
                        jp += lrow(c) * block(0, m)(c, cc);
                        jm += lrow(c) * block(0, -m)(c, cc);
                    }
                    J(row, col) = (jp + jm).real();
                    J(row, col + 1) = (I * jp - I * jm).real();
                    col += 2;
                }
            }
            for (int cc = 0; cc < n; ++cc) {
                Complex j0(0, 0);
                for (int c = 0; c < n; ++c) j0 += lrow(c) * block(0, 0)(c, cc);
                J(row, col++) = j0.real();
            }
            J(row, col) = 0;  // d does not enter mode 0
            ++row;
        }
        // mean constraints
        for (int mc = 0; mc < r; ++mc) {
            int col = 2 * n * M;
            for (int cc = 0; cc < n; ++cc) J(row, col + cc) = B0(cc, mc);
            ++row;
        }
        // phase condition Im(l . mode1)
        {
            int col = 0;
            for (int m = 1; m <= M; ++m)
                for (int cc = 0; cc < n; ++cc) {
                    if (m == 1) {
                        J(row, col) = crit.l_vec(cc).imag();
                        J(row, col + 1) = crit.l_vec(cc).real();
                    }
                    col += 2;
                }
            ++row;
        }
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible()) throw NewtonDiverged("singular wave Jacobian");
        x -= lu.solve(F);
    }
    if (fnorm > 1e-9) throw NewtonDiverged("wave Newton did not reach tolerance");
    unpack(x, w);
    w.residual_norm = fnorm;
    w.newton_history = history;
    return w;
}

BlochSample bloch_matrix(const FourierSymbol& sym, const NonlinearitySpec& spec,
                         const CriticalData& crit, const TravelingWave& wave,
                         Real sigma, Real C_override) {
    const Real k = crit.k_star + wave.eps * wave.kappa_tilde;
    const Real C = std::isnan(C_override) ? k * (crit.d_star + crit.delta) : C_override;
    Assembled lin = bloch_assemble(sym, spec, wave.modes, wave.trunc, k,
                                   wave.eps * wave.eps, wave.speed, sigma, C);
    BlochSample bs;
    bs.sigma = sigma;
    bs.matrix = lin.B;
    Eigen::ComplexEigenSolver<MatC> es(lin.B, false);
    std::vector<Complex> all(es.eigenvalues().data(),
                             es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(all.begin(), all.end(),
              [](Complex a, Complex b) { return std::abs(a) < std::abs(b); });
    const int keep = sym.conserved_rank + 2;
    bs.small.assign(all.begin(), all.begin() + std::min<size_t>(keep, all.size()));
    return bs;
}

VecC bloch_eigenvalues(const FourierSymbol& sym, const NonlinearitySpec& spec,
                       const CriticalData& crit, const TravelingWave& wave, Real sigma) {
    const Real k = crit.k_star + wave.eps * wave.kappa_tilde;
    Assembled lin = bloch_assemble(sym, spec, wave.modes, wave.trunc, k,
                                   wave.eps * wave.eps, wave.speed, sigma,
                                   k * (crit.d_star + crit.delta));
    Eigen::ComplexEigenSolver<MatC> es(lin.B, false);
    return es.eigenvalues();
}

namespace {

Real permutation_match(const std::vector<Complex>& a, const std::vector<Complex>& b,
                       std::vector<int>& best_perm) {
    // exact assignment for <= 4 elements: try all permutations
    const int m = static_cast<int>(a.size());
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    Real best = 1e300;
    best_perm = perm;
    do {
        Real worst = 0;
        for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(a[i] - b[perm[i]]));
        if (worst < best) {
            best = worst;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace

SpectralMatchReport spectral_match(const FourierSymbol& sym, const NonlinearitySpec& spec,
                                   const CriticalData& crit, const PsiCorrections& psi,
                                   const AmplitudeCoeffs& coeffs, const TravelingWave& wave,
                                   const std::vector<Real>& sigma_grid) {
    const Real eps = wave.eps;
    const Real esq = eps * eps;
    // amplitude and its eps-derivative from the computed waves
    const Real alpha = 2 * std::abs((crit.l_vec * wave.mode(1))(0, 0)) / eps;
    Real alpha1 = 0;
    {
        NewtonOptions no;
        no.trunc = wave.trunc;
        TravelingWave half = newton_wave(sym, spec, crit, psi, coeffs, eps / 2,
                                         wave.kappa_tilde, wave.beta, no);
        const Real ah = 2 * std::abs((crit.l_vec * half.mode(1))(0, 0)) / (eps / 2);
        alpha1 = (alpha - ah) / (eps - eps / 2);
    }

    ReducedExampleData red;
    red.k_star = crit.k_star;
    red.kappa_t = wave.kappa_tilde;
    red.alpha = alpha;
    red.alpha1 = alpha1;
    red.lambda_kk = crit.lambda_kk;
    red.gamma = coeffs.gamma;
    red.V1 = coeffs.V1.size() ? coeffs.V1(0) : Complex(0, 0);
    red.r1_sq = std::norm(crit.r_vec(0));
    red.r2_sq = sym.dim > 1 ? std::norm(crit.r_vec(1)) : 0.0;
    red.v = coeffs.v_vec.size() ? coeffs.v_vec(0) : Complex(0, 0);
    red.C0 = crit.k_star * (crit.d_star + crit.delta);
    red.C0_eps = 0;

    ScalarCoeffs dummy;
    WaveParams wp;
    wp.alpha = alpha;
    wp.kappa = wave.kappa_tilde;

    SpectralMatchReport rep;
    for (Real s : sigma_grid) {
        BlochSample bs = bloch_matrix(sym, spec, crit, wave, s);
        StabilityMatrix sm = build_M(dummy, wp, eps, s, StabilityModel::ReducedExample, &red);
        Eigen::ComplexEigenSolver<MatC> es(sm.entries, false);
        std::vector<Complex> reduced(es.eigenvalues().data(), es.eigenvalues().data() + 3);
        std::vector<Complex> bloch = bs.small;
        if (bloch.size() != reduced.size())
            throw BranchMatchingFailed("eigenvalue count mismatch");
        std::vector<int> perm;
        const Real worst = permutation_match(bloch, reduced, perm);
        SpectralMatchRow row;
        row.sigma = s;
        row.bloch = bloch;
        for (int i = 0; i < 3; ++i) row.reduced.push_back(reduced[perm[i]]);
        row.mismatch = worst / esq;
        rep.rows.push_back(row);
        rep.max_mismatch = std::max(rep.max_mismatch, row.mismatch);
        if (s == 0.0) {
            // stable small eigenvalue against 2 eps^2 alpha^2 Re gamma
            Real pred = 2 * esq * alpha * alpha * coeffs.gamma.real();
            Real got = 0;
            Real best = 1e300;
            for (const auto& ev : bloch) {
                if (std::abs(ev - Complex(pred, 0)) < best) {
                    best = std::abs(ev - Complex(pred, 0));
                    got = ev.real();
                }
            }
            rep.sigma0_gap = std::abs(got - pred) / std::abs(pred);
        }
    }
    return rep;
}

} // namespace convamp
