#include "qcw/oct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace qcw {

namespace {

std::size_t node_index(const ControlField& f, double t, const char* what) {
    const double dt = f.grid[1] - f.grid[0];
    const double x = (t - f.grid.front()) / dt;
    const auto i = std::size_t(std::llround(x));
    if (i >= f.grid.size() || std::abs(f.grid[i] - t) > 1e-9)
        throw std::invalid_argument(std::string("propagate_adjoint: ") + what +
                                    " must lie on the field grid");
    return i;
}

double hierarchy_norm(const std::vector<Mat3>& ados) {
    double m = 0.0;
    for (const auto& a : ados) m = std::max(m, a.cwiseAbs().maxCoeff());
    return m;
}

} // namespace

HeomConfig isolated_backend(const SystemSpec& s) {
    HeomConfig hc = default_heom_config();
    hc.system = s;
    hc.depth = 0;  // single zero index: no neighbours, so the baths never act
    return hc;
}

ControlField oct_guess_field(double peak_y, double peak_z, const SystemSpec& s, std::size_t n) {
    if (n < 2) throw std::invalid_argument("oct_guess_field: need at least two intervals");
    ControlField f;
    f.picture = Picture::Schrodinger;
    f.interp = EnvelopeInterp::Linear;
    f.omega_y = 0.0;  // raw waveform: the carrier lives in the samples
    f.omega_z = 0.0;
    f.grid.resize(n + 1);
    f.env_y.resize(n + 1);
    f.env_z.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = double(i) / double(n);
        const double s2 = std::sin(PI * t) * std::sin(PI * t);
        f.grid[i] = t;
        f.env_y[i] = peak_y * s2 * std::cos(s.omega_y * t);
        f.env_z[i] = peak_z * s2 * std::cos(s.omega_z * t);
    }
    return f;
}

std::pair<double, double> waveform_areas(const ControlField& f) {
    std::vector<double> ay(f.env_y.size()), az(f.env_z.size());
    for (std::size_t i = 0; i < f.env_y.size(); ++i) {
        ay[i] = std::abs(f.env_y[i]);
        az[i] = std::abs(f.env_z[i]);
    }
    const double half_pi = 0.5 * PI;
    return {half_pi * pulse_area(ay, f.grid), half_pi * pulse_area(az, f.grid)};
}

std::pair<double, double> field_increment(const Mat3& chi0, const Mat3& rho0, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("field_increment: alpha must be positive");
    // P_y = |0><1| + h.c., P_z = |0><2| + h.c.; with the H = H0 - eps_p P_p
    // coupling the ascent direction along eps_p is -Im Tr(chi0+ [P_p, rho0])
    const auto channel = [&](int lvl) {
        Mat3 p = Mat3::Zero();
        p(0, lvl) = p(lvl, 0) = 1.0;
        const Mat3 comm = p * rho0 - rho0 * p;
        return -(chi0.adjoint() * comm).trace().imag() / alpha;
    };
    return {channel(1), channel(2)};
}

AdjointRun propagate_adjoint(const HierarchyState& chiT, const ControlField& field,
                             const HeomKernel& kernel, double t0,
                             const std::function<void(std::size_t, const Mat3&)>& on_node) {
    field.validate();
    if (field.picture != Picture::Schrodinger)
        throw std::invalid_argument(
            "propagate_adjoint: the hierarchy propagates in the Schrodinger picture only");
    if (chiT.config_hash != kernel.config_hash())
        throw std::invalid_argument(
            "propagate_adjoint: costate was produced under a different hierarchy configuration");
    if (chiT.ados.size() != kernel.table().size())
        throw std::invalid_argument("propagate_adjoint: costate size does not match the hierarchy");
    const std::size_t i_hi = node_index(field, chiT.t, "seed time");
    const std::size_t i_lo = node_index(field, t0, "end time");
    if (i_hi < i_lo)
        throw std::invalid_argument("propagate_adjoint: end time is ahead of the costate");

    const int m = kernel.substeps_per_interval(field);
    const SystemSpec& sys = kernel.config().system;
    const double norm0 = hierarchy_norm(chiT.ados);

    AdjointRun run;
    run.state = chiT;
    run.tops.assign(field.grid.size(), Mat3::Zero());

    const std::size_t n = kernel.table().size();
    std::vector<Mat3> k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto& ados = run.state.ados;

    auto visit = [&](std::size_t node) {
        const double norm = hierarchy_norm(ados);
        if (!(norm <= 1e3 * norm0))
            throw std::runtime_error(
                "propagate_adjoint: costate norm grew from " + std::to_string(norm0) + " to " +
                std::to_string(norm) + " by t = " + std::to_string(field.grid[node]) +
                " — unstable update step (alpha too small for this grid?)");
        run.tops[node] = ados[0];
        if (on_node) on_node(node, ados[0]);
    };
    visit(i_hi);

    // chi' = -A+(t) chi integrated in the reversed time variable: plain RK4
    // on d chi/d tau = +A+ chi while t walks downward, each interval against
    // its own envelope sample (matching the forward stepper's discretization)
    for (std::size_t i = i_hi; i-- > i_lo;) {
        const double h = (field.grid[i + 1] - field.grid[i]) / double(m);
        double t = field.grid[i + 1];
        for (int step = 0; step < m; ++step) {
            kernel.rhs_adjoint(ados, k1, build_h_interval(field, i, t, sys));
            for (std::size_t j = 0; j < n; ++j) tmp[j] = ados[j] + (0.5 * h) * k1[j];
            const Mat3 hmid = build_h_interval(field, i, t - 0.5 * h, sys);
            kernel.rhs_adjoint(tmp, k2, hmid);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = ados[j] + (0.5 * h) * k2[j];
            kernel.rhs_adjoint(tmp, k3, hmid);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = ados[j] + h * k3[j];
            kernel.rhs_adjoint(tmp, k4, build_h_interval(field, i, t - h, sys));
            for (std::size_t j = 0; j < n; ++j)
                ados[j] += (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            t -= h;
        }
        run.state.t = field.grid[i];
        visit(i);
    }
    return run;
}

OctIterate oct_iterate(const ControlField& field, const std::vector<Mat3>& tops,
                       const HeomKernel& kernel, const OctConfig& cfg) {
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("oct_iterate: alpha must be positive");
    if (tops.size() != field.grid.size())
        throw std::invalid_argument(
            "oct_iterate: stored forward trajectory does not match the field grid");
    const SystemSpec& sys = kernel.config().system;
    const double t_end = field.grid.back();
    const std::size_t last = field.grid.size() - 1;

    ControlField next = field;
    // the costate seed is the target rotated out of the interaction frame,
    // where the fidelity is scored: Tr(target rho_I(T)) = Tr(chi_T rho_S(T))
    const HierarchyState seed = kernel.cold_start(to_interaction_frame(cfg.target, sys, -t_end),
                                                  t_end);
    propagate_adjoint(seed, next, kernel, field.grid.front(),
                      [&](std::size_t i, const Mat3& chi0) {
                          // trapezoid weight of sample i under linear interp
                          const double lo = i > 0 ? next.grid[i - 1] : next.grid[0];
                          const double hi = i < last ? next.grid[i + 1] : next.grid[last];
                          const double w = 0.5 * (hi - lo);
                          const auto [gy, gz] = field_increment(chi0, tops[i], cfg.alpha);
                          next.env_y[i] += w * gy;
                          next.env_z[i] += w * gz;
                      });

    HeomRun fwd = propagate_heom(cfg.rho0, next, kernel, next.grid.front(), t_end);
    OctIterate out;
    out.fidelity = fidelity(to_interaction_frame(fwd.traj.rho.back(), sys, t_end), cfg.target);
    out.tops = std::move(fwd.traj.rho);
    out.field = std::move(next);
    return out;
}

OctRun run_oct(const OctConfig& cfg) {
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("run_oct: alpha must be positive");
    if (cfg.iterations < 0) throw std::invalid_argument("run_oct: iterations must be >= 0");
    cfg.guess.validate();
    if (cfg.guess.picture != Picture::Schrodinger)
        throw std::invalid_argument("run_oct: the optimizer drives raw Schrodinger-picture fields");
    // zero stored carriers bypass validate()'s sampling guard, but the grid
    // still has to resolve the system's physical carriers for raw samples to
    // describe the waveform
    const SystemSpec& sys = cfg.backend.system;
    const double wmax = std::max(std::abs(sys.omega_y), std::abs(sys.omega_z));
    const double dt = cfg.guess.grid[1] - cfg.guess.grid[0];
    if (wmax > 0.0 && dt > PI / wmax)
        throw std::invalid_argument("run_oct: guess grid too coarse for the system's carriers");

    const HeomKernel kernel(cfg.backend);
    const double t_end = cfg.guess.grid.back();

    OctRun out;
    auto record = [&](const ControlField& f, double fid) {
        const auto [ay, az] = waveform_areas(f);
        out.fidelity.push_back(fid);
        out.area_y.push_back(ay);
        out.area_z.push_back(az);
        out.fields.push_back(f);
    };

    HeomRun fwd = propagate_heom(cfg.rho0, cfg.guess, kernel, cfg.guess.grid.front(), t_end);
    record(cfg.guess,
           fidelity(to_interaction_frame(fwd.traj.rho.back(), sys, t_end), cfg.target));

    ControlField field = cfg.guess;
    std::vector<Mat3> tops = std::move(fwd.traj.rho);
    for (int k = 0; k < cfg.iterations; ++k) {
        OctIterate it = oct_iterate(field, tops, kernel, cfg);
        field = std::move(it.field);
        tops = std::move(it.tops);
        record(field, it.fidelity);
    }
    return out;
}

void write_oct_csv(const std::string& path, const OctRun& run) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("write_oct_csv: cannot open " + path);
    std::fputs("iteration,fidelity,area_y,area_z\n", fp);
    for (std::size_t k = 0; k < run.fidelity.size(); ++k)
        std::fprintf(fp, "%zu,%.17g,%.17g,%.17g\n", k, run.fidelity[k], run.area_y[k],
                     run.area_z[k]);
    if (std::fclose(fp) != 0) throw std::runtime_error("write_oct_csv: write failed");
}

} // namespace qcw
