#include "qcw/bath.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "qcw/units.hpp"

namespace qcw {

namespace {

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7/15 quadrature on complex-valued integrands.
// Bisects until |K15 - G7| <= atol + rtol * |whole K15 estimate|.
// ---------------------------------------------------------------------------

// Kronrod-15 abscissae (positive half) and weights; Gauss-7 reuses the
// odd-indexed abscissae.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
    cplx k15;
    double err;
};

PanelResult gk15(const std::function<cplx(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    cplx fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    cplx k15 = kWgk[7] * fv[7];
    cplx g7 = kWg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        k15 += kWgk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) g7 += kWg[i / 2] * (fv[i] + fv[14 - i]);
    }
    k15 *= h;
    g7 *= h;
    return {k15, std::abs(k15 - g7)};
}

cplx integrate_adaptive(const std::function<cplx(double)>& f, double a, double b,
                        double rtol = 1e-10, double atol = 1e-14) {
    struct Seg {
        double a, b;
        PanelResult r;
    };
    std::vector<Seg> stack;
    stack.push_back({a, b, gk15(f, a, b)});
    cplx total = stack[0].r.k15;
    double toterr = stack[0].r.err;
    int evals = 15;
    while (toterr > atol + rtol * std::abs(total)) {
        // split the worst segment
        size_t worst = 0;
        for (size_t i = 1; i < stack.size(); ++i)
            if (stack[i].r.err > stack[worst].r.err) worst = i;
        Seg s = stack[worst];
        stack.erase(stack.begin() + static_cast<long>(worst));
        const double m = 0.5 * (s.a + s.b);
        Seg l{s.a, m, gk15(f, s.a, m)};
        Seg r{m, s.b, gk15(f, m, s.b)};
        total += l.r.k15 + r.r.k15 - s.r.k15;
        toterr += l.r.err + r.r.err - s.r.err;
        stack.push_back(l);
        stack.push_back(r);
        evals += 30;
        if (evals > 3000000)
            throw std::runtime_error("bath: correlation quadrature did not converge");
    }
    return total;
}

// Bose occupation with care near omega = 0 (integrands below never hit 0
// exactly; expm1 keeps the 1/(beta w) pole accurate).
double bose(double omega, double beta) { return 1.0 / std::expm1(beta * omega); }

double term_density(double omega, const LorentzianTerm& t) {
    // [(w+W)^2+G^2][(w-W)^2+G^2] = (w^2-W^2-G^2)^2 + 4 G^2 w^2
    const double a = omega * omega - t.Omega * t.Omega - t.Gamma * t.Gamma;
    return t.p * omega / (a * a + 4.0 * t.Gamma * t.Gamma * omega * omega);
}

void validate_terms(const LorentzianParams& params) {
    for (const auto& t : params.terms)
        if (!(t.Omega > 0.0) || !(t.Gamma > 0.0))
            throw std::invalid_argument("bath: Lorentzian terms require Omega > 0, Gamma > 0");
}

} // namespace

double spectral_density(double omega, const LorentzianParams& params) {
    double j = 0.0;
    for (const auto& t : params.terms) j += term_density(omega, t);
    return j;
}

cplx correlation_quadrature(double t, const BathSpec& spec) {
    if (t < 0.0) return std::conj(correlation_quadrature(-t, spec));
    const auto& terms = spec.params.terms;
    if (terms.empty()) return 0.0;
    validate_terms(spec.params);
    if (!(spec.beta > 0.0)) throw std::invalid_argument("bath: beta must be positive");
    const double beta = spec.beta;

    // C(t) = (1/pi) [ Int_0^inf 2 J n cos(wt) dw  +  Int_0^inf J e^{-iwt} dw ].
    //
    // Thermal branch: exponentially cut by the Bose factor.
    double omega_hi = 0.0;
    for (const auto& tm : terms) omega_hi = std::max(omega_hi, tm.Omega + 10.0 * tm.Gamma);
    omega_hi = std::max(omega_hi, 60.0 / beta);
    auto thermal = [&](double w) -> cplx {
        return 2.0 * spectral_density(w, spec.params) * bose(w, beta) * std::cos(w * t);
    };

    // Zero-temperature branch decays only ~w^-3 with an oscillatory phase, so
    // rotate the contour onto the negative imaginary axis:
    //   Int_0^inf J e^{-iwt} dw = -i Int_0^inf J(-is) e^{-st} ds
    //                             + sum_l (pi p_l / 4 W_l G_l) e^{(-iW_l - G_l) t}
    // where -i J(-is) = -p s / [(W^2+G^2-s^2)^2 + 4 s^2 W^2] is real, smooth,
    // and monotone-decaying for large s.
    auto rotated = [&](double s) -> cplx {
        double v = 0.0;
        for (const auto& tm : terms) {
            const double a = tm.Omega * tm.Omega + tm.Gamma * tm.Gamma - s * s;
            v -= tm.p * s / (a * a + 4.0 * s * s * tm.Omega * tm.Omega);
        }
        return v * std::exp(-s * t);
    };
    double s_knee = 0.0;
    for (const auto& tm : terms)
        s_knee = std::max(s_knee, 4.0 * std::sqrt(tm.Omega * tm.Omega + tm.Gamma * tm.Gamma));

    cplx acc;
    try {
        acc = integrate_adaptive(thermal, 0.0, omega_hi, 1e-10, 1e-14);
        acc += integrate_adaptive(rotated, 0.0, s_knee, 1e-10, 1e-16);
        acc += integrate_adaptive(rotated, s_knee, 5.0e4, 1e-10, 1e-16);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error("bath '" + spec.label + "': " + std::string(e.what()) +
                                 " (t = " + std::to_string(t) + ")");
    }
    for (const auto& tm : terms) {
        const double r = PI * tm.p / (4.0 * tm.Omega * tm.Gamma);
        acc += r * std::exp(cplx(-tm.Gamma * t, -tm.Omega * t));
    }
    return acc / PI;
}

BathExpansion expand_correlation(const BathSpec& spec, bool include_matsubara,
                                 int n_matsubara) {
    validate_terms(spec.params);
    const auto& ts = spec.params.terms;
    for (size_t l = 0; l < ts.size(); ++l)
        for (size_t m = l + 1; m < ts.size(); ++m)
            if (std::abs(ts[l].Omega - ts[m].Omega) + std::abs(ts[l].Gamma - ts[m].Gamma) < 1e-9)
                throw std::domain_error("bath: nearly degenerate Lorentzian poles, "
                                        "residue expansion ill-conditioned");
    BathExpansion exp;
    const double beta = spec.beta;
    auto coth = [](cplx z) { return 1.0 / std::tanh(z); };
    for (const auto& tm : spec.params.terms) {
        const double pref = tm.p / (8.0 * tm.Omega * tm.Gamma);
        const cplx zp(tm.Omega, tm.Gamma);   // pole W + iG
        const cplx zm(tm.Omega, -tm.Gamma);  // appears through coth at W - iG
        BathMode plus;
        plus.gamma = cplx(tm.Omega, tm.Gamma);
        plus.alpha = pref * (coth(0.5 * beta * zp) - 1.0);
        BathMode minus;
        minus.gamma = cplx(-tm.Omega, tm.Gamma);
        minus.alpha = pref * (coth(0.5 * beta * zm) + 1.0);
        // C*(t) shares the exponentials: coefficients swap across the pair.
        plus.alpha_tilde = std::conj(minus.alpha);
        minus.alpha_tilde = std::conj(plus.alpha);
        exp.modes.push_back(plus);
        exp.modes.push_back(minus);
    }
    if (include_matsubara) {
        for (int n = 1; n <= n_matsubara; ++n) {
            const double nu = 2.0 * PI * n / beta;
            double sum = 0.0;  // J(i nu) = i nu * sum (pure imaginary)
            for (const auto& tm : spec.params.terms) {
                const double a = tm.Omega * tm.Omega + tm.Gamma * tm.Gamma - nu * nu;
                sum += tm.p / (a * a + 4.0 * nu * nu * tm.Omega * tm.Omega);
            }
            BathMode m;
            m.gamma = cplx(0.0, nu);
            m.alpha = cplx(-2.0 * nu / beta * sum, 0.0);
            m.alpha_tilde = m.alpha;
            m.matsubara = true;
            exp.modes.push_back(m);
        }
    }
    to_real_imag_form(exp);
    return exp;
}

cplx matsubara_tail(double t, const BathSpec& spec, int n_from, int n_to) {
    const double beta = spec.beta;
    double acc = 0.0;
    for (int n = n_from + 1; n <= n_to; ++n) {
        const double nu = 2.0 * PI * n / beta;
        double sum = 0.0;
        for (const auto& tm : spec.params.terms) {
            const double a = tm.Omega * tm.Omega + tm.Gamma * tm.Gamma - nu * nu;
            sum += tm.p / (a * a + 4.0 * nu * nu * tm.Omega * tm.Omega);
        }
        const double term = -2.0 * nu / beta * sum * std::exp(-nu * t);
        acc += term;
        if (std::abs(term) < 1e-16 * (std::abs(acc) + 1e-30)) break;
    }
    return cplx(acc, 0.0);
}

void to_real_imag_form(BathExpansion& exp) {
    exp.real_modes.clear();
    exp.imag_modes.clear();
    for (const auto& m : exp.modes) {
        // C = C_R + i C_I with C_R = (C + C*)/2, C_I = (C - C*)/(2i); each mode
        // keeps its exponential e^{i gamma t} = e^{-(-i gamma) t}.
        const cplx decay = -I1 * m.gamma;
        const cplx cr = 0.5 * (m.alpha + m.alpha_tilde);
        const cplx ci = (m.alpha - m.alpha_tilde) / (2.0 * I1);
        if (std::abs(cr) > 0.0) exp.real_modes.push_back({cr, decay});
        if (std::abs(ci) > 0.0) exp.imag_modes.push_back({ci, decay});
    }
}

cplx BathExpansion::reconstruct(double t) const {
    cplx acc = 0.0;
    for (const auto& m : modes) acc += m.alpha * std::exp(I1 * m.gamma * t);
    return acc;
}

cplx BathExpansion::reconstruct_conj(double t) const {
    cplx acc = 0.0;
    for (const auto& m : modes) acc += m.alpha_tilde * std::exp(I1 * m.gamma * t);
    return acc;
}

namespace {

LorentzianParams default_lorentzians(double p) {
    // Peaks at the 1700 / 2300 cm^-1 intramolecular modes; width 0.3 puts the
    // correlation decay at ~2.5% of C(0) by t = 10 while the first peak still
    // completes a full oscillation inside one pulse duration.
    return {{{p, cm1_to_reduced(1700.0), 0.30}, {p, cm1_to_reduced(2300.0), 0.30}}};
}

} // namespace

BathSpec default_tuning_bath() {
    BathSpec s;
    s.params = default_lorentzians(38.47);
    s.beta = beta_reduced(300.0);
    s.coupling_op = Mat3::Zero();
    s.coupling_op(1, 1) = 1.0;
    s.coupling_op(2, 2) = 0.89;  // ~sqrt(0.797): unequal diagonal pulls so the
                                 // tuning bath dephases |1><2| as well
    s.label = "tuning-S1S2";
    return s;
}

BathSpec default_coupling_bath() {
    BathSpec s;
    s.params = default_lorentzians(38.47);
    s.beta = beta_reduced(300.0);
    s.coupling_op = Mat3::Zero();
    s.coupling_op(1, 2) = 1.0;
    s.coupling_op(2, 1) = 1.0;
    s.label = "coupling";
    return s;
}

} // namespace qcw
