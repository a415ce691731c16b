#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>
#include <cmath>

#include "qcw/units.hpp"

// V-type three-level system: ground |0> at energy 0 and two excited states
// |1>, |2> that both couple radiatively to |0> (never to each other). Two
// orthogonally polarized fields drive the two transitions. The control goal
// everywhere is the equal-weight superposition (|1>+|2>)(<1|+<2|)/2, reached
// from |0> by constant Rabi envelopes of area pi/sqrt(2) per channel.

namespace qcw {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;

inline constexpr cplx I1{0.0, 1.0};

struct SystemSpec {
    double e1 = 0.16277 * T_AU;  // energy of |1>, reduced units (E*T)
    double e2 = 0.16439 * T_AU;  // energy of |2>
    double mu_y = 3.96;          // <0|mu|1>, e*a0 (sign carried)
    double mu_z = -1.83;         // <0|mu|2>
    double omega_y = 0.16277 * T_AU;  // carrier, channel y (resonant default)
    double omega_z = 0.16439 * T_AU;  // carrier, channel z
    double detuning_y = 0.0;
    double detuning_z = 0.0;
};

inline Mat3 build_h0(const SystemSpec& s) {
    Mat3 h = Mat3::Zero();
    h(1, 1) = s.e1;
    h(2, 2) = s.e2;
    return h;
}

// |0><1| + |1><0| and |0><2| + |2><0| — the two transition (dipole direction)
// operators; dipole magnitudes are carried by the field envelopes.
inline Mat3 dipole_op_y() { Mat3 m = Mat3::Zero(); m(0,1) = m(1,0) = 1.0; return m; }
inline Mat3 dipole_op_z() { Mat3 m = Mat3::Zero(); m(0,2) = m(2,0) = 1.0; return m; }

inline Mat3 target_state() {
    Mat3 m = Mat3::Zero();
    m(1,1) = m(2,2) = m(1,2) = m(2,1) = 0.5;
    return m;
}

inline Mat3 ground_state() { Mat3 m = Mat3::Zero(); m(0,0) = 1.0; return m; }

// Re Tr(target^dag rho); both arguments Hermitian in use.
inline double fidelity(const Mat3& rho, const Mat3& target) {
    return ((target.adjoint() * rho).trace()).real();
}

inline double purity(const Mat3& rho) { return (rho * rho).trace().real(); }

// e^{+i H0 t} rho e^{-i H0 t}: Schrodinger -> interaction frame. The target
// state is an interaction-frame object; Schrodinger-picture backends rotate
// their final state through this before any fidelity is computed.
inline Mat3 to_interaction_frame(const Mat3& rho, const SystemSpec& s, double t) {
    Eigen::Vector3cd u(1.0, std::exp(I1 * s.e1 * t), std::exp(I1 * s.e2 * t));
    return u.asDiagonal() * rho * u.conjugate().asDiagonal();
}

// ---------------------------------------------------------------------------
// Control fields
// ---------------------------------------------------------------------------

enum class Picture { RwaInteraction, Schrodinger };
enum class EnvelopeInterp { PiecewiseConstant, Linear };

// Envelope samples on a uniform grid over [0,1] (reduced time). In the RWA
// picture samples are reduced Rabi frequencies T*Omega; in the Schrodinger
// picture they are T*mu*E and the Hamiltonian multiplies in cos(omega t)
// (a zero carrier degenerates to cos(0)=1, i.e. samples ARE the raw field —
// the representation optimal-control updates live in).
struct ControlField {
    std::vector<double> grid;   // N+1 times, 0..1
    std::vector<double> env_y;
    std::vector<double> env_z;
    Picture picture = Picture::RwaInteraction;
    EnvelopeInterp interp = EnvelopeInterp::Linear;
    double omega_y = 0.0;       // carriers, used only in Schrodinger picture
    double omega_z = 0.0;

    std::size_t n_intervals() const { return grid.empty() ? 0 : grid.size() - 1; }

    void validate() const {
        if (grid.size() < 2) throw std::invalid_argument("ControlField: grid needs >= 2 samples");
        if (env_y.size() != grid.size() || env_z.size() != grid.size())
            throw std::invalid_argument("ControlField: envelope arrays must match the grid length");
        if (picture == Picture::Schrodinger) {
            // Nyquist guard: at least 2 samples per carrier period
            const double dt = grid[1] - grid[0];
            const double wmax = std::max(std::abs(omega_y), std::abs(omega_z));
            if (wmax > 0.0 && dt > PI / wmax)
                throw std::invalid_argument("ControlField: grid too coarse for the carrier (needs >= 2 samples/period)");
        }
    }

    double env_at(double t, const std::vector<double>& env) const {
        const std::size_t n = n_intervals();
        const double dt = 1.0 / double(n);
        if (t <= 0.0) return env.front();
        if (t >= 1.0) return interp == EnvelopeInterp::PiecewiseConstant ? env[n - 1] : env.back();
        const double x = t / dt;
        std::size_t i = std::min(std::size_t(x), n - 1);
        if (interp == EnvelopeInterp::PiecewiseConstant) return env[i];
        const double f = x - double(i);
        return env[i] * (1.0 - f) + env[i + 1] * f;
    }
    double env_y_at(double t) const { return env_at(t, env_y); }
    double env_z_at(double t) const { return env_at(t, env_z); }
};

inline ControlField constant_field(double omega_y_env, double omega_z_env, std::size_t n = 50) {
    ControlField f;
    f.picture = Picture::RwaInteraction;
    f.interp = EnvelopeInterp::PiecewiseConstant;
    f.grid.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) f.grid[i] = double(i) / double(n);
    f.env_y.assign(n + 1, omega_y_env);
    f.env_z.assign(n + 1, omega_z_env);
    return f;
}

// peak * sin^2(pi t): the standard guess envelope; area = peak/2.
inline ControlField sine_squared_field(double peak_y, double peak_z, std::size_t n = 50) {
    ControlField f;
    f.picture = Picture::RwaInteraction;
    f.interp = EnvelopeInterp::Linear;
    f.grid.resize(n + 1);
    f.env_y.resize(n + 1);
    f.env_z.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = double(i) / double(n);
        const double s2 = std::sin(PI * t) * std::sin(PI * t);
        f.grid[i] = t;
        f.env_y[i] = peak_y * s2;
        f.env_z[i] = peak_z * s2;
    }
    return f;
}

// peak * sin^2(pi t) sampled at interval midpoints as a piecewise-constant
// envelope — the guess form delta-mode actions perturb. Midpoint sampling
// makes the piecewise-constant area exactly peak/2 at any n.
inline ControlField sine_squared_pwc_field(double peak_y, double peak_z, std::size_t n = 50) {
    ControlField f = constant_field(0.0, 0.0, n);
    for (std::size_t i = 0; i < n; ++i) {
        const double tm = (double(i) + 0.5) / double(n);
        const double s2 = std::sin(PI * tm) * std::sin(PI * tm);
        f.env_y[i] = peak_y * s2;
        f.env_z[i] = peak_z * s2;
    }
    f.env_y[n] = f.env_y[n - 1];
    f.env_z[n] = f.env_z[n - 1];
    return f;
}

// trapezoidal integral of envelope samples over reduced time
inline double pulse_area(const std::vector<double>& env, const std::vector<double>& grid) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        a += 0.5 * (env[i] + env[i + 1]) * (grid[i + 1] - grid[i]);
    return a;
}

// exact envelope integrals under the field's own interpolation rule
inline std::pair<double, double> field_areas(const ControlField& f) {
    if (f.interp == EnvelopeInterp::Linear)
        return {pulse_area(f.env_y, f.grid), pulse_area(f.env_z, f.grid)};
    double ay = 0.0, az = 0.0;  // piecewise-constant: sample i covers interval i
    for (std::size_t i = 0; i + 1 < f.grid.size(); ++i) {
        const double dt = f.grid[i + 1] - f.grid[i];
        ay += f.env_y[i] * dt;
        az += f.env_z[i] * dt;
    }
    return {ay, az};
}

inline double area_rule() { return PI / std::sqrt(2.0); }  // per-channel area of the analytic solution

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

// RWA/interaction picture, resonant carriers absorbed (hbar = 1):
//   H = -1/2 [[0, Wy, Wz], [Wy, -2 Dy, 0], [Wz, 0, -2 Dz]]
inline Mat3 build_h_rwa(const ControlField& f, double t, const SystemSpec& s) {
    if (f.picture != Picture::RwaInteraction)
        throw std::invalid_argument("build_h_rwa: field is not in the RWA picture");
    const double wy = f.env_y_at(t), wz = f.env_z_at(t);
    Mat3 h = Mat3::Zero();
    h(0,1) = h(1,0) = -0.5 * wy;
    h(0,2) = h(2,0) = -0.5 * wz;
    h(1,1) = s.detuning_y;
    h(2,2) = s.detuning_z;
    return h;
}

// Schrodinger picture with explicit carriers:
//   H = H0 - env_y(t) cos(wy t) (|0><1|+h.c.) - env_z(t) cos(wz t) (|0><2|+h.c.)
inline Mat3 build_h_schrodinger(const ControlField& f, double t, const SystemSpec& s) {
    if (f.picture != Picture::Schrodinger)
        throw std::invalid_argument("build_h_schrodinger: field is not in the Schrodinger picture");
    const double ey = f.env_y_at(t) * std::cos(f.omega_y * t);
    const double ez = f.env_z_at(t) * std::cos(f.omega_z * t);
    Mat3 h = build_h0(s);
    h(0,1) -= ey; h(1,0) -= ey;
    h(0,2) -= ez; h(2,0) -= ez;
    return h;
}

inline Mat3 build_h(const ControlField& f, double t, const SystemSpec& s) {
    return f.picture == Picture::RwaInteraction ? build_h_rwa(f, t, s)
                                                : build_h_schrodinger(f, t, s);
}

// Hamiltonian with the envelope pinned to grid interval i — the one-sided
// limit a piecewise-constant field has everywhere on [t_i, t_{i+1}]. The
// steppers integrate each interval against its own sample, which is the
// correct RK4 treatment of the node discontinuity and keeps the result
// independent of samples beyond the active interval (those may not be
// decided yet when a field is being built one action at a time). Linearly
// interpolated fields are continuous and fall through to build_h.
inline Mat3 build_h_interval(const ControlField& f, std::size_t i, double t,
                             const SystemSpec& s) {
    if (f.interp != EnvelopeInterp::PiecewiseConstant) return build_h(f, t, s);
    const double wy = f.env_y[i], wz = f.env_z[i];
    if (f.picture == Picture::RwaInteraction) {
        Mat3 h = Mat3::Zero();
        h(0,1) = h(1,0) = -0.5 * wy;
        h(0,2) = h(2,0) = -0.5 * wz;
        h(1,1) = s.detuning_y;
        h(2,2) = s.detuning_z;
        return h;
    }
    const double ey = wy * std::cos(f.omega_y * t);
    const double ez = wz * std::cos(f.omega_z * t);
    Mat3 h = build_h0(s);
    h(0,1) -= ey; h(1,0) -= ey;
    h(0,2) -= ez; h(2,0) -= ez;
    return h;
}

// ---------------------------------------------------------------------------
// Isolated propagation (fixed-step RK4)
// ---------------------------------------------------------------------------

struct Trajectory {
    std::vector<double> t;
    std::vector<Mat3> rho;
    const Mat3& final_rho() const { return rho.back(); }
};

// Substep count per grid interval from the step-size rule max|H| dt < bound.
// |H| is measured by the infinity norm sampled on the grid (plus envelope
// extrema for the carriers, which the grid samples already bound).
inline int substeps_for(const ControlField& f, const SystemSpec& s, double bound) {
    double hmax = 1e-12;
    for (double t : f.grid) {
        const Mat3 h = build_h(f, t, s);
        hmax = std::max(hmax, h.cwiseAbs().rowwise().sum().maxCoeff());
    }
    const double dt_grid = f.grid[1] - f.grid[0];
    return std::max(1, int(std::ceil(dt_grid * hmax / bound)));
}

// Snap a time to its index on the (uniform) field grid; stepping interfaces
// must land exactly on grid nodes.
inline std::size_t field_grid_index(const ControlField& f, double t, const char* what) {
    const double x = t * double(f.n_intervals());
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 * std::max(1.0, std::abs(x)) || r < 0.0 ||
        r > double(f.n_intervals()))
        throw std::invalid_argument(std::string(what) + ": time " + std::to_string(t) +
                                    " is not a field grid node");
    return std::size_t(r);
}

// rho' = -i [H(t), rho] integrated over the grid window [t0, t1]; unitary, so
// trace and purity are preserved. Samples are returned on the field grid.
// Trace drift beyond 1e-6 aborts (step-size instability guard). The default
// substep budget |H| dt <= 0.025 keeps the RK4 unitarity defect
// (~ steps * (|H| dt)^6 / 72) below 1e-9 even for Schrodinger-picture
// carriers, well inside the 1e-8 purity requirement. Stepping a window at a
// time with a fixed substeps_override reproduces the whole-field run exactly.
inline Trajectory propagate_isolated_window(const Mat3& rho_start, const ControlField& f,
                                            const SystemSpec& s, double t0, double t1,
                                            int substeps_override = 0) {
    f.validate();
    const std::size_t i0 = field_grid_index(f, t0, "propagate_isolated");
    const std::size_t i1 = field_grid_index(f, t1, "propagate_isolated");
    if (i1 <= i0) throw std::invalid_argument("propagate_isolated: window must run forward");
    const int m = substeps_override > 0 ? substeps_override : substeps_for(f, s, 0.025);
    Trajectory out;
    out.t.reserve(i1 - i0 + 1);
    out.rho.reserve(i1 - i0 + 1);
    Mat3 rho = rho_start;
    out.t.push_back(f.grid[i0]);
    out.rho.push_back(rho);
    std::size_t iv = i0;
    const auto rhs = [&](double t, const Mat3& r) -> Mat3 {
        const Mat3 h = build_h_interval(f, iv, t, s);
        return -I1 * (h * r - r * h);
    };
    for (std::size_t i = i0; i < i1; ++i) {
        iv = i;
        const double h = (f.grid[i + 1] - f.grid[i]) / double(m);
        double t = f.grid[i];
        for (int k = 0; k < m; ++k) {
            const Mat3 k1 = rhs(t, rho);
            const Mat3 k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1);
            const Mat3 k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2);
            const Mat3 k4 = rhs(t + h, rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        if (std::abs(rho.trace().real() - rho_start.trace().real()) > 1e-6)
            throw std::runtime_error("propagate_isolated: trace drift — step size unstable");
        out.t.push_back(f.grid[i + 1]);
        out.rho.push_back(rho);
    }
    return out;
}

inline Trajectory propagate_isolated(const Mat3& rho0, const ControlField& f,
                                     const SystemSpec& s, int substeps_override = 0) {
    return propagate_isolated_window(rho0, f, s, f.grid.front(), f.grid.back(),
                                     substeps_override);
}

} // namespace qcw
