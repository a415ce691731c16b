#pragma once

#include <memory>
#include <vector>

#include "qcw/heom.hpp"
#include "qcw/lindblad.hpp"
#include "qcw/model.hpp"
#include "qcw/policy.hpp"

// Episodic control environment over any propagation backend. Each step t
// applies the action pair as a piecewise-constant envelope over the interval
// [t/N, (t+1)/N) — absolute Rabi amplitudes, or deltas added to a guess field
// in delta mode — advances the dynamics, and pays reward 0 until the final
// step, whose reward is the fidelity against the target superposition. The
// RWA backends (isolated, both Lindblad variants) act on reduced Rabi
// envelopes; the hierarchy backend is driven in the Schrodinger picture with
// the resonant carriers multiplied in internally, and carries its auxiliary
// hierarchy state from step to step (the policy never sees it: observations
// are the 9 real components of rho alone).

namespace qcw {

enum class Backend { Isolated, LindbladConst, LindbladTd, Heom };
enum class ActionMode { Absolute, Delta };

// the 9 real degrees of freedom of a Hermitian 3x3 density matrix
Obs observe(const Mat3& rho);

struct EnvConfig {
    Backend backend = Backend::Isolated;
    std::size_t n_steps = 50;  // 50 for RWA backends, 100 for the hierarchy
    ActionMode action_mode = ActionMode::Absolute;
    double a_min = 0.0, a_max = 3.0;  // Rabi interval, or delta interval [-2, 2]
    ControlField guess;               // delta mode: piecewise-constant base field
    SystemSpec system;
    std::vector<CollapseChannel> channels;  // Lindblad backends
    HeomConfig heom = default_heom_config();
    Mat3 rho0 = ground_state();
    Mat3 target = target_state();
};

struct RolloutState {
    Mat3 rho;
    ControlField field;   // realized envelopes, filled step by step
    std::size_t step = 0;
    HierarchyState hier;  // hierarchy backend only
};

class Environment {
  public:
    explicit Environment(EnvConfig cfg);

    const EnvConfig& config() const { return cfg_; }
    const ControlField& base_field() const { return base_; }
    int substeps() const { return substeps_; }  // fixed worst-case budget
    const HeomKernel* kernel() const { return kernel_.get(); }

    RolloutState reset() const;
    // applies the action over the current interval; returns the reward
    double step(RolloutState& st, const Action& action) const;
    bool done(const RolloutState& st) const { return st.step >= cfg_.n_steps; }
    // final-state fidelity convention: Schrodinger-picture states are rotated
    // into the interaction frame before comparing against the target
    double terminal_fidelity(const Mat3& rho) const;

  private:
    EnvConfig cfg_;
    ControlField base_;
    int substeps_ = 0;
    std::shared_ptr<HeomKernel> kernel_;
};

} // namespace qcw
