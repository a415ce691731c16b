#include "qcw/lindblad.hpp"

#include <cmath>
#include <stdexcept>

namespace qcw {

double RateFunction::operator()(double t) const {
    switch (kind) {
        case RateKind::Constant:
            return c;
        case RateKind::Polynomial: {
            double acc = 0.0;
            for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
            return acc;
        }
        case RateKind::SineExp:
            return a * std::sin(b * t + phi) * std::exp(-d * t);
        case RateKind::Tabulated: {
            if (times.empty()) return 0.0;
            if (t <= times.front()) return values.front();
            if (t >= times.back()) return values.back();
            const auto it = std::upper_bound(times.begin(), times.end(), t);
            const std::size_t i = std::size_t(it - times.begin()) - 1;
            const double f = (t - times[i]) / (times[i + 1] - times[i]);
            return values[i] * (1.0 - f) + values[i + 1] * f;
        }
    }
    return 0.0;
}

RateFunction RateFunction::constant(double v) {
    RateFunction r;
    r.kind = RateKind::Constant;
    r.c = v;
    return r;
}

RateFunction RateFunction::polynomial(std::vector<double> coeffs) {
    if (coeffs.size() > 6)
        throw std::invalid_argument("RateFunction: polynomial degree must be <= 5");
    RateFunction r;
    r.kind = RateKind::Polynomial;
    r.coeffs = std::move(coeffs);
    return r;
}

RateFunction RateFunction::sine_exp(double a, double b, double phi, double d) {
    RateFunction r;
    r.kind = RateKind::SineExp;
    r.a = a;
    r.b = b;
    r.phi = phi;
    r.d = d;
    return r;
}

RateFunction RateFunction::tabulated(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2)
        throw std::invalid_argument("RateFunction: tabulated form needs matching arrays, >= 2 samples");
    RateFunction r;
    r.kind = RateKind::Tabulated;
    r.times = std::move(times);
    r.values = std::move(values);
    return r;
}

std::vector<CollapseChannel> default_channels() {
    auto proj = [](int j, int k) {
        Mat3 m = Mat3::Zero();
        m(j, k) = 1.0;
        return m;
    };
    return {
        {proj(1, 1), RateFunction::constant(1.0), "dephase-S1"},
        {proj(2, 2), RateFunction::constant(0.8), "dephase-S2"},
        {proj(1, 2), RateFunction::constant(0.36), "transfer-down"},
        {proj(2, 1), RateFunction::constant(0.16), "transfer-up"},
    };
}

Mat3 lindblad_rhs(const Mat3& rho, double t, const Mat3& h,
                  const std::vector<CollapseChannel>& channels, bool strict_markovian) {
    Mat3 out = -I1 * (h * rho - rho * h);
    for (const auto& ch : channels) {
        const double g = ch.rate(t);
        if (g == 0.0) continue;
        if (strict_markovian && g < 0.0)
            throw std::domain_error("lindblad: negative rate '" + ch.label +
                                    "' rejected in strict-Markovian mode");
        const Mat3 ldag_l = ch.op.adjoint() * ch.op;
        out += g * (ch.op * rho * ch.op.adjoint() -
                    0.5 * (ldag_l * rho + rho * ldag_l));
    }
    return out;
}

Trajectory propagate_lindblad_window(const Mat3& rho_start, const ControlField& field,
                                     const SystemSpec& spec,
                                     const std::vector<CollapseChannel>& channels, double t0,
                                     double t1, bool strict_markovian, int substeps_override) {
    field.validate();
    const std::size_t i0 = field_grid_index(field, t0, "propagate_lindblad");
    const std::size_t i1 = field_grid_index(field, t1, "propagate_lindblad");
    if (i1 <= i0) throw std::invalid_argument("propagate_lindblad: window must run forward");
    const int m = substeps_override > 0 ? substeps_override : substeps_for(field, spec, 0.025);
    Trajectory out;
    out.t.reserve(i1 - i0 + 1);
    out.rho.reserve(i1 - i0 + 1);
    Mat3 rho = rho_start;
    out.t.push_back(field.grid[i0]);
    out.rho.push_back(rho);
    std::size_t iv = i0;
    const auto rhs = [&](double t, const Mat3& r) {
        return lindblad_rhs(r, t, build_h_interval(field, iv, t, spec), channels,
                            strict_markovian);
    };
    for (std::size_t i = i0; i < i1; ++i) {
        iv = i;
        const double h = (field.grid[i + 1] - field.grid[i]) / double(m);
        double t = field.grid[i];
        for (int k = 0; k < m; ++k) {
            const Mat3 k1 = rhs(t, rho);
            const Mat3 k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1);
            const Mat3 k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2);
            const Mat3 k4 = rhs(t + h, rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        if (std::abs(rho.trace().real() - rho_start.trace().real()) > 1e-6)
            throw std::runtime_error("propagate_lindblad: trace drift — step size unstable");
        out.t.push_back(field.grid[i + 1]);
        out.rho.push_back(rho);
    }
    return out;
}

Trajectory propagate_lindblad(const Mat3& rho0, const ControlField& field, const SystemSpec& spec,
                              const std::vector<CollapseChannel>& channels, bool strict_markovian,
                              int substeps_override) {
    return propagate_lindblad_window(rho0, field, spec, channels, field.grid.front(),
                                     field.grid.back(), strict_markovian, substeps_override);
}

} // namespace qcw
