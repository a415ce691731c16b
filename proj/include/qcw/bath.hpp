#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qcw/model.hpp"

// Tuning and coupling baths: two-pole Lorentzian spectral densities, thermal
// correlation functions, and their exponential (damped-oscillatory) expansions
// feeding the hierarchy propagator and the rate calibration.
//
//   J(w)   = sum_l p_l w / ( [(w+W_l)^2+G_l^2] [(w-W_l)^2+G_l^2] )
//   C(t)   = (1/pi) Int dw J(w) e^{iwt} / (e^{beta w} - 1)     (full line)
//   C(t>0) = sum_k alpha_k e^{i gamma_k t},    C*(t) = sum_k alpha~_k e^{i gamma_k t}
//
// gamma_k = +-W_l + i G_l from the Lorentzian poles, plus optional Matsubara
// modes at gamma = i 2 pi n / beta.

namespace qcw {

struct LorentzianTerm {
    double p;       // strength
    double Omega;   // center frequency, reduced units
    double Gamma;   // width, reduced units
};

struct LorentzianParams {
    std::vector<LorentzianTerm> terms;
};

double spectral_density(double omega, const LorentzianParams& params);

struct BathSpec {
    LorentzianParams params;
    double beta = 1.0;      // inverse temperature, reduced
    Mat3 coupling_op;       // Hermitian system operator S
    std::string label;      // {"tuning-S1S2", "coupling"}
};

struct BathMode {
    cplx alpha;        // coefficient in C(t)
    cplx alpha_tilde;  // coefficient in C*(t) over the same exponentials
    cplx gamma;        // frequency: C contribution alpha e^{i gamma t}; Im gamma > 0
    bool matsubara = false;
};

struct RealImagMode {
    cplx c;      // c_k^{R or I}
    cplx gamma;  // decay rate gamma_k^{R or I}: term c e^{-gamma t}
};

struct BathExpansion {
    std::vector<BathMode> modes;
    // alternative view: C = C_R + i C_I, C_R = sum c^R e^{-g^R t}, C_I likewise
    std::vector<RealImagMode> real_modes;
    std::vector<RealImagMode> imag_modes;

    cplx reconstruct(double t) const;        // sum alpha_k e^{i gamma_k t}  (t >= 0)
    cplx reconstruct_conj(double t) const;   // sum alpha~_k e^{i gamma_k t} (= C*(t))
};

// Thermal correlation function by adaptive quadrature (relative tol ~1e-8).
// The zero-temperature branch decays only ~w^-3 on the real axis, so it is
// evaluated on a rotated contour (negative imaginary axis + Lorentzian pole
// residues); the Bose-weighted remainder is cut off exponentially.
cplx correlation_quadrature(double t, const BathSpec& spec);

// Analytic pole residues of Eq. 12 inserted into the thermal integral.
// Matsubara modes appended at gamma = i 2 pi n / beta when requested.
BathExpansion expand_correlation(const BathSpec& spec, bool include_matsubara = false,
                                 int n_matsubara = 0);

// Analytic sum of the *dropped* Matsubara modes n in (n_from, n_to] evaluated
// at time t — used to isolate residue-algebra error from Matsubara truncation
// in the reconstruction report.
cplx matsubara_tail(double t, const BathSpec& spec, int n_from, int n_to = 100000);

// Populate the real/imaginary split view (exact rearrangement, no fitting).
void to_real_imag_form(BathExpansion& exp);

// Default workbench baths. Peaks at 1700 / 2300 cm^-1 equivalents, widths so
// C(t) decays in ~10 pulse durations and oscillates once within one, strengths
// so field-free population transfer out of |2> is ~10% over one pulse
// (golden-rule calibration; the reference parameters are not public).
BathSpec default_tuning_bath();
BathSpec default_coupling_bath();

} // namespace qcw
