#include "qcw/env.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qcw {

Obs observe(const Mat3& rho) {
    Obs o;
    o << rho(0, 0).real(), rho(1, 1).real(), rho(2, 2).real(),
         rho(0, 1).real(), rho(0, 1).imag(),
         rho(0, 2).real(), rho(0, 2).imag(),
         rho(1, 2).real(), rho(1, 2).imag();
    return o;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.n_steps < 1) throw std::invalid_argument("Environment: n_steps must be >= 1");
    if (!(cfg_.a_min <= cfg_.a_max))  // negated form also rejects NaN bounds
        throw std::invalid_argument("Environment: action interval must satisfy a_min <= a_max");
    const bool schrodinger = cfg_.backend == Backend::Heom;

    if (cfg_.action_mode == ActionMode::Delta) {
        // Actions are piecewise-constant deltas, so the guess they compose
        // with must live on the same step grid in the same representation.
        base_ = cfg_.guess;
        base_.validate();
        if (base_.n_intervals() != cfg_.n_steps)
            throw std::invalid_argument(
                "Environment: delta-mode guess must have n_steps intervals");
        if (base_.interp != EnvelopeInterp::PiecewiseConstant)
            throw std::invalid_argument(
                "Environment: delta-mode guess must be piecewise constant "
                "(resample smooth envelopes onto the step grid)");
        if (base_.picture != (schrodinger ? Picture::Schrodinger : Picture::RwaInteraction))
            throw std::invalid_argument(
                "Environment: delta-mode guess picture does not match the backend");
    } else {
        base_ = constant_field(0.0, 0.0, cfg_.n_steps);
        if (schrodinger) {
            base_.picture = Picture::Schrodinger;
            base_.omega_y = cfg_.system.omega_y;
            base_.omega_z = cfg_.system.omega_z;
        }
        base_.validate();
    }

    // Freeze one substep budget from the largest field the action interval
    // can realize. A per-call budget would vary with the envelopes seen so
    // far and break the equality between stepping an episode and propagating
    // the realized field in one call.
    ControlField worst = base_;
    const double amax = std::max(std::abs(cfg_.a_min), std::abs(cfg_.a_max));
    for (std::size_t i = 0; i < worst.grid.size(); ++i) {
        worst.env_y[i] = std::abs(base_.env_y[i]) + amax;
        worst.env_z[i] = std::abs(base_.env_z[i]) + amax;
    }
    if (cfg_.backend == Backend::Heom) {
        cfg_.heom.system = cfg_.system;  // one source of truth for the Hamiltonian
        cfg_.heom.substeps = 0;
        const HeomKernel probe(cfg_.heom);
        substeps_ = probe.substeps_per_interval(worst);
        cfg_.heom.substeps = substeps_;
        kernel_ = std::make_shared<HeomKernel>(cfg_.heom);
    } else {
        substeps_ = substeps_for(worst, cfg_.system, 0.025);
    }
}

RolloutState Environment::reset() const {
    RolloutState st;
    st.rho = cfg_.rho0;
    st.field = base_;
    st.step = 0;
    if (cfg_.backend == Backend::Heom) st.hier = kernel_->cold_start(cfg_.rho0);
    return st;
}

double Environment::step(RolloutState& st, const Action& action) const {
    if (st.step >= cfg_.n_steps)
        throw std::logic_error("Environment::step: episode already finished");
    const std::size_t i = st.step;
    const bool delta = cfg_.action_mode == ActionMode::Delta;
    const double ay = (delta ? base_.env_y[i] : 0.0) + action[0];
    const double az = (delta ? base_.env_z[i] : 0.0) + action[1];
    st.field.env_y[i] = ay;
    st.field.env_z[i] = az;
    if (i + 1 == cfg_.n_steps) {
        // the end sample covers no interval; mirror the last action so the
        // exported field carries no leftover base value
        st.field.env_y[i + 1] = ay;
        st.field.env_z[i + 1] = az;
    }
    const double t0 = st.field.grid[i], t1 = st.field.grid[i + 1];
    switch (cfg_.backend) {
        case Backend::Isolated:
            st.rho = propagate_isolated_window(st.rho, st.field, cfg_.system, t0, t1, substeps_)
                         .final_rho();
            break;
        case Backend::LindbladConst:
        case Backend::LindbladTd:
            // same stepper either way; the two names tell the trainer/CLI
            // which channel set to load (constant rates vs fitted functions)
            st.rho = propagate_lindblad_window(st.rho, st.field, cfg_.system, cfg_.channels, t0,
                                               t1, /*strict_markovian=*/false, substeps_)
                         .final_rho();
            break;
        case Backend::Heom: {
            HeomRun run = propagate_heom(st.hier, st.field, *kernel_, t1);
            st.hier = std::move(run.state);
            st.rho = st.hier.ados[0];
            break;
        }
    }
    ++st.step;
    return st.step == cfg_.n_steps ? terminal_fidelity(st.rho) : 0.0;
}

double Environment::terminal_fidelity(const Mat3& rho) const {
    const Mat3 r = cfg_.backend == Backend::Heom
                       ? to_interaction_frame(rho, cfg_.system, base_.grid.back())
                       : rho;
    return fidelity(r, cfg_.target);
}

} // namespace qcw
