#include "convamp/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include "convamp/errors.hpp"

namespace convamp {

MatC outer_factor(const NonlinearitySpec& spec, Complex ik) {
    const int n = spec.dim();
    MatC m = MatC::Zero(n, n);
    for (int p = 0; p < n; ++p) m(p, p) = spec.conserved_outer[p] ? ik : Complex(1, 0);
    return m;
}

namespace {

// permutations of {0,1} and {0,1,2}: tiny, enumerate directly
Complex mono_bilinear(const Monomial& mo, Real eta1, Real eta2,
                      const VecC& x, const VecC& y) {
    const auto& f0 = mo.factors[0];
    const auto& f1 = mo.factors[1];
    const Complex w1 = std::pow(I * eta1, f0.second) * x(f0.first)
                     * std::pow(I * eta2, f1.second) * y(f1.first);
    const Complex w2 = std::pow(I * eta2, f0.second) * y(f0.first)
                     * std::pow(I * eta1, f1.second) * x(f1.first);
    return mo.coeff * 0.5 * (w1 + w2);
}

Complex mono_trilinear(const Monomial& mo, Real e1, Real e2, Real e3,
                       const VecC& x, const VecC& y, const VecC& z) {
    const Real etas[3] = {e1, e2, e3};
    const VecC* args[3] = {&x, &y, &z};
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                    {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    Complex acc(0, 0);
    for (const auto& pm : perms) {
        Complex w(1, 0);
        for (int s = 0; s < 3; ++s) {
            const auto& f = mo.factors[s];
            w *= std::pow(I * etas[pm[s]], f.second) * (*args[pm[s]])(f.first);
        }
        acc += w;
    }
    return mo.coeff * acc / 6.0;
}

} // namespace

VecC multiplier_Q(const NonlinearitySpec& spec, Real eta1, Real eta2,
                  const VecC& x, const VecC& y) {
    const int n = spec.dim();
    VecC out = VecC::Zero(n);
    for (int p = 0; p < n; ++p)
        for (const auto& mo : spec.rows[p])
            if (mo.degree() == 2) out(p) += mono_bilinear(mo, eta1, eta2, x, y);
    return out;
}

VecC multiplier_Qnu(const NonlinearitySpec& spec, Real eta1, Real eta2,
                    const VecC& x, const VecC& y) {
    // -i d/d(eta1) of each monomial contribution, differentiated analytically
    const int n = spec.dim();
    VecC out = VecC::Zero(n);
    for (int p = 0; p < n; ++p) {
        for (const auto& mo : spec.rows[p]) {
            if (mo.degree() != 2) continue;
            const auto& f0 = mo.factors[0];
            const auto& f1 = mo.factors[1];
            const int a = f0.second, b = f1.second;
            // d/d eta1 of (i eta1)^a x_i (i eta2)^b y_j term
            Complex d1 = (a > 0)
                ? Real(a) * std::pow(I * eta1, a - 1) * I * x(f0.first)
                      * std::pow(I * eta2, b) * y(f1.first)
                : Complex(0, 0);
            // d/d eta1 of (i eta2)^a y_i (i eta1)^b x_j term
            Complex d2 = (b > 0)
                ? std::pow(I * eta2, a) * y(f0.first) * Real(b)
                      * std::pow(I * eta1, b - 1) * I * x(f1.first)
                : Complex(0, 0);
            out(p) += -I * mo.coeff * 0.5 * (d1 + d2);
        }
    }
    return out;
}

VecC multiplier_C(const NonlinearitySpec& spec, Real eta1, Real eta2, Real eta3,
                  const VecC& x, const VecC& y, const VecC& z) {
    const int n = spec.dim();
    VecC out = VecC::Zero(n);
    for (int p = 0; p < n; ++p)
        for (const auto& mo : spec.rows[p])
            if (mo.degree() == 3) out(p) += mono_trilinear(mo, eta1, eta2, eta3, x, y, z);
    return out;
}

VecC multiplier_MQ(const NonlinearitySpec& spec, Real eta1, Real eta2,
                   const VecC& x, const VecC& y) {
    return outer_factor(spec, I * (eta1 + eta2)) * multiplier_Q(spec, eta1, eta2, x, y);
}

Mat eval_ntilde(const NonlinearitySpec& spec, const std::vector<Mat>& derivs) {
    const int n = spec.dim();
    const auto rows = derivs[0].rows();
    Mat out = Mat::Zero(rows, n);
    for (int p = 0; p < n; ++p) {
        for (const auto& mo : spec.rows[p]) {
            Vec term = Vec::Constant(rows, mo.coeff);
            for (const auto& f : mo.factors)
                term = term.cwiseProduct(derivs[f.second].col(f.first));
            out.col(p) += term;
        }
    }
    return out;
}

} // namespace convamp
