#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "convamp/amplitude.hpp"
#include "convamp/errors.hpp"
#include "convamp/io.hpp"

using namespace convamp;

namespace {

struct Setup {
    Model model;
    CriticalData crit;
    PsiCorrections psi;
    AmplitudeCoeffs coeffs;
};

Setup make_setup(const std::string& which) {
    Setup s;
    s.model = parse_model(which == "sh" ? swift_hohenberg_o2_json() : example_so2_json());
    s.crit = find_critical(s.model.symbol);
    s.psi = compute_psi(s.model.symbol, s.crit, s.model.nonlinearity);
    s.coeffs = compute_amplitude_coeffs(s.model.symbol, s.crit, s.model.nonlinearity, s.psi);
    return s;
}

const Setup& example_setup() {
    static Setup s = make_setup("example");
    return s;
}

const Setup& sh_setup() {
    static Setup s = make_setup("sh");
    return s;
}

} // namespace

TEST_CASE("bilinear multiplier of the bundled nonlinearity, free row") {
    const NonlinearitySpec& spec = example_setup().model.nonlinearity;
    std::mt19937 rng(7);
    std::normal_distribution<Real> g;
    VecC x(2), y(2);
    for (int i = 0; i < 2; ++i) {
        x(i) = Complex(g(rng), g(rng));
        y(i) = Complex(g(rng), g(rng));
    }
    VecC q = multiplier_Q(spec, 0.3, -0.9, x, y);
    CHECK(std::abs(q(1) - 0.5 * x(1) * y(1)) < 1e-14);  // row 2 of (u^2, v^2)/2
    // symmetry under swapping arguments with their frequencies
    VecC qs = multiplier_Q(spec, -0.9, 0.3, y, x);
    CHECK((q - qs).norm() < 1e-14);
}

TEST_CASE("multiplier reality on random inputs") {
    const NonlinearitySpec& spec = example_setup().model.nonlinearity;
    std::mt19937 rng(11);
    std::normal_distribution<Real> g;
    std::uniform_real_distribution<Real> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        VecC x(2), y(2);
        for (int i = 0; i < 2; ++i) {
            x(i) = Complex(g(rng), g(rng));
            y(i) = Complex(g(rng), g(rng));
        }
        const Real e1 = u(rng), e2 = u(rng);
        VecC lhs = multiplier_Q(spec, e1, e2, x, y).conjugate();
        VecC rhs = multiplier_Q(spec, -e1, -e2, x.conjugate(), y.conjugate());
        CHECK((lhs - rhs).norm() < 1e-13);
    }
}

TEST_CASE("Q_nu matches the centered finite difference of Q in eta1") {
    // use a spec with derivative monomials so Q actually depends on eta
    const NonlinearitySpec& spec = sh_setup().model.nonlinearity;
    NonlinearitySpec mixed = spec;
    Monomial extra;
    extra.coeff = 0.7;
    extra.factors = {{0, 1}, {0, 2}};
    mixed.rows[0].push_back(extra);
    std::mt19937 rng(3);
    std::normal_distribution<Real> g;
    for (int trial = 0; trial < 10; ++trial) {
        VecC x(1), y(1);
        x(0) = Complex(g(rng), g(rng));
        y(0) = Complex(g(rng), g(rng));
        const Real e1 = 0.4 + 0.1 * trial, e2 = -1.1;
        const Real h = 1e-5;
        VecC fd = (multiplier_Q(mixed, e1 + h, e2, x, y)
                   - multiplier_Q(mixed, e1 - h, e2, x, y)) / (2 * h) * (-I);
        VecC qn = multiplier_Qnu(mixed, e1, e2, x, y);
        CHECK((fd - qn).norm() / std::max(qn.norm(), 1e-12) < 1e-6);
    }
}

TEST_CASE("ansatz corrections of the bundled convective model") {
    const Setup& s = example_setup();

    // N1 acts as multiplication by the reciprocal of the complement eigenvalue
    // of S(k*,0) + i d* k*; two independent routes must agree
    const MatC S1 = s.model.symbol.eval(s.crit.k_star, 0.0)
                    + I * s.crit.d_star * s.crit.k_star * MatC::Identity(2, 2);
    const Complex denom_trace = S1.trace();  // the other eigenvalue is 0
    VecC w = VecC::Zero(2);
    w(0) = Complex(0.3, -0.2);
    w(1) = Complex(1.1, 0.4);
    const MatC Pi1 = s.crit.r_vec * s.crit.l_vec;
    const VecC wc = (MatC::Identity(2, 2) - Pi1) * w;
    const VecC n1w = s.psi.N1 * wc;
    CHECK((denom_trace * n1w - wc).norm() < 1e-10 * wc.norm());
    // frozen verified constant (the value printed alongside the defining
    // formula is internally inconsistent; see the repository notes)
    CHECK(std::abs(denom_trace - Complex(-3.309401, 3.079745)) < 1e-3);

    // Psi_0 = 1/4 |A|^2 (0, |r2|^2)
    CHECK(std::abs(s.psi.psi0_coeff(0)) < 1e-12);
    CHECK(std::abs(s.psi.psi0_coeff(1) - 0.25 * std::norm(s.crit.r_vec(1))) < 1e-12);
    // real and in range(I - Pi0)
    CHECK((s.psi.Pi0 * s.psi.psi0_coeff).norm() < 1e-12);

    // psi1 lies in range(I - Pi1)
    CHECK(std::abs((s.crit.l_vec * s.psi.psi1_coeff)(0, 0)) < 1e-10);
}

TEST_CASE("O(2) fixture: psi corrections collapse and coefficients are real") {
    const Setup& s = sh_setup();
    CHECK(s.psi.psi1_coeff.norm() < 1e-14);  // i times a real vector, trivially
    CHECK(s.psi.psi2_coeff.norm() < 1e-14);
    CHECK(s.coeffs.o2_mode);
    CHECK(s.coeffs.compat_F);
    CHECK(s.coeffs.compat_H);
    CHECK(std::abs(s.coeffs.a.imag()) < 1e-10);
    CHECK(std::abs(s.coeffs.b.imag()) < 1e-10);
    CHECK(std::abs(s.coeffs.gamma.imag()) < 1e-10);
    CHECK(s.coeffs.V1.imag().norm() < 1e-10);
    CHECK(s.coeffs.v_vec.imag().norm() < 1e-10);
    CHECK(std::abs(s.coeffs.gamma - Complex(-0.75, 0)) < 1e-10);
    CHECK(std::abs(s.coeffs.D_mat(0, 0) - 1.0) < 1e-12);
}

TEST_CASE("cGL coefficients of the bundled convective model") {
    const Setup& s = example_setup();
    CHECK(std::abs(s.coeffs.a - 0.5 * Complex(1.3292, 1.4717)) < 1e-3);
    CHECK(s.coeffs.a.real() > 0);
    CHECK(s.coeffs.b.real() > 0);
    CHECK(s.coeffs.gamma.real() < 0);  // supercritical by the choice of cubic

    // phase invariance: r -> e^{i chi} r, l -> e^{-i chi} l
    CriticalData crit2 = s.crit;
    const Complex ph = std::exp(I * 0.7);
    crit2.r_vec = s.crit.r_vec * ph;
    crit2.l_vec = s.crit.l_vec / ph;
    PsiCorrections psi2 = compute_psi(s.model.symbol, crit2, s.model.nonlinearity);
    AmplitudeCoeffs c2;
    compute_cgl_coeffs(s.model.symbol, crit2, s.model.nonlinearity, psi2, c2);
    CHECK(std::abs(c2.gamma - s.coeffs.gamma) < 1e-10);
    VecC wreal = VecC::Zero(1);
    wreal(0) = Complex(1, 0);
    CHECK(std::abs(c2.V1(0) - s.coeffs.V1(0)) < 1e-10);
}

TEST_CASE("mean-mode coefficients of the bundled convective model") {
    const Setup& s = example_setup();
    const Mat skk = -2 * (Mat(2, 2) << 2, 1, 1, 2).finished();
    const Mat P0 = s.psi.Pi0;
    Mat pskkp = P0 * skk * P0;
    CHECK(pskkp(0, 0) == -4.0);
    CHECK(pskkp(0, 1) == 0.0);
    Mat pskkq = P0 * skk * (Mat::Identity(2, 2) - P0);
    CHECK(pskkq(0, 1) == -2.0);
    CHECK(s.coeffs.D_mat(0, 0) == 2.0);

    CHECK(std::abs(s.coeffs.F_mat(0, 0) - 2.2689) < 1e-3);
    CHECK(std::abs(s.coeffs.F_mat(0, 0) + s.crit.lambda_k.imag()) < 1e-10);
    CHECK(std::abs(s.coeffs.H_vec(0) - 0.25 * std::norm(s.crit.r_vec(0))) < 1e-12);
    CHECK_FALSE(s.coeffs.compat_F);
    CHECK_FALSE(s.coeffs.compat_H);
    CHECK(s.coeffs.H_im_residue < 1e-12);
}

TEST_CASE("Darcy reduction closed forms") {
    CHECK(std::abs(darcy_ctilde_scalar(Complex(-3, 3), Complex(1, -1), 1, 2)
                   - Complex(-5, 5)) < 1e-14);
    CHECK(std::abs(darcy_ctilde_scalar(Complex(-3, 2), Complex(1, -2.0 / 3), 1, 2)
                   - Complex(-5, 10.0 / 3)) < 1e-14);

    // compatible O(2) case: F = 0 is singular
    const Setup& sh = sh_setup();
    CHECK_THROWS_AS(darcy_reduce(sh.coeffs), SingularF);

    // the bundled convective model has an invertible F
    const Setup& s = example_setup();
    DarcyReduction red = darcy_reduce(s.coeffs);
    CHECK(std::abs(red.ctilde - (s.coeffs.gamma + red.deltaA)) < 1e-14);
    CHECK(std::abs(red.B_closure_coeff(0)
                   - s.coeffs.H_vec(0) / s.coeffs.F_mat(0, 0)) < 1e-12);
}

TEST_CASE("residual oracle: slopes separate correct and mutated coefficients") {
    const Setup& s = example_setup();
    std::vector<Real> eps_list = {0.1, 0.05, 0.025};

    ResidualReport good = residual_oracle(s.model.symbol, s.model.nonlinearity, s.crit,
                                          s.coeffs, s.psi, eps_list);
    CHECK(good.mode1_slope >= 2.7);
    // conserved-row mode-0 residual vanishes structurally
    for (const auto& smp : good.samples) CHECK(smp.mode0_pi0 < 1e-13);

    AmplitudeCoeffs bad = s.coeffs;
    bad.gamma *= 2.0;
    ResidualReport mut = residual_oracle(s.model.symbol, s.model.nonlinearity, s.crit,
                                         bad, s.psi, eps_list);
    CHECK(mut.mode1_slope < 2.5);

    ResidualOracleOptions opt;
    opt.throw_on_shallow = true;
    CHECK_THROWS_AS(residual_oracle(s.model.symbol, s.model.nonlinearity, s.crit, bad,
                                    s.psi, eps_list, opt),
                    SlopeTooShallow);
}

TEST_CASE("residual oracle: zero amplitude at the band edge is exact") {
    const Setup& s = example_setup();
    ResidualOracleOptions opt;
    // kappa at the existence edge: alpha = 0, the constant state is exact
    opt.kappa = std::sqrt(s.coeffs.b.real() / s.coeffs.a.real());
    ResidualReport rep = residual_oracle(s.model.symbol, s.model.nonlinearity, s.crit,
                                         s.coeffs, s.psi, {0.05}, opt);
    CHECK(rep.samples[0].mode1_l < 1e-13);
    CHECK(rep.samples[0].mode0_full < 1e-13);
}

TEST_CASE("residual oracle exercises the mean coupling when beta is nonzero") {
    const Setup& s = example_setup();
    ResidualOracleOptions opt;
    opt.beta = Vec::Constant(1, 0.3);
    ResidualReport good = residual_oracle(s.model.symbol, s.model.nonlinearity, s.crit,
                                          s.coeffs, s.psi, {0.1, 0.05, 0.025}, opt);
    CHECK(good.mode1_slope >= 2.7);
    AmplitudeCoeffs bad = s.coeffs;
    bad.V1 *= 2.0;
    ResidualReport mut = residual_oracle(s.model.symbol, s.model.nonlinearity, s.crit,
                                         bad, s.psi, {0.1, 0.05, 0.025}, opt);
    CHECK(mut.mode1_slope < 2.5);
}
