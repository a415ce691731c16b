#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qcw/model.hpp"

// Lindblad propagation with constant or time-dependent channel rates. The
// four default channels and their reduced-unit rates reproduce the Markovian
// reference dynamics; time-dependent rates (fitted elsewhere from a
// decoherence matrix) may be transiently negative, in which case positivity
// of rho is monitored, not enforced.

namespace qcw {

enum class RateKind { Constant, Polynomial, SineExp, Tabulated };

struct RateFunction {
    RateKind kind = RateKind::Constant;
    double c = 0.0;                      // Constant
    std::vector<double> coeffs;          // Polynomial: sum coeffs[i] t^i, degree <= 5
    double a = 0.0, b = 0.0, phi = 0.0, d = 0.0;  // SineExp: a sin(b t + phi) e^{-d t}
    std::vector<double> times, values;   // Tabulated, linear interpolation

    double operator()(double t) const;

    static RateFunction constant(double v);
    static RateFunction polynomial(std::vector<double> coeffs);
    static RateFunction sine_exp(double a, double b, double phi, double d);
    static RateFunction tabulated(std::vector<double> times, std::vector<double> values);
};

struct CollapseChannel {
    Mat3 op;
    RateFunction rate;
    std::string label;
};

// L1=|1><1|, L2=|2><2|, L3=|1><2|, L4=|2><1| with reduced rates 1, 0.8,
// 0.36, 0.16 (pure dephasing on each excited level, downward and upward
// transfer between them).
std::vector<CollapseChannel> default_channels();

// -i[H, rho] + sum_k G_k(t) (L rho L+ - 1/2 {L+L, rho}); diagonal rate matrix.
// strict_markovian rejects negative instantaneous rates.
Mat3 lindblad_rhs(const Mat3& rho, double t, const Mat3& h,
                  const std::vector<CollapseChannel>& channels, bool strict_markovian = false);

// RK4 on the field grid, substepped like the isolated propagator. Trace drift
// beyond 1e-6 aborts. The window variant advances an already-evolved state
// across grid nodes [t0, t1]; with a fixed substeps_override, stepping window
// by window reproduces the whole-field run exactly.
Trajectory propagate_lindblad_window(const Mat3& rho_start, const ControlField& field,
                                     const SystemSpec& spec,
                                     const std::vector<CollapseChannel>& channels, double t0,
                                     double t1, bool strict_markovian = false,
                                     int substeps_override = 0);
Trajectory propagate_lindblad(const Mat3& rho0, const ControlField& field, const SystemSpec& spec,
                              const std::vector<CollapseChannel>& channels,
                              bool strict_markovian = false, int substeps_override = 0);

} // namespace qcw
