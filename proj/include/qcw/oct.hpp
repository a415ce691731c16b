#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qcw/heom.hpp"
#include "qcw/model.hpp"

// Monotonic optimal-control refinement of the two-channel drive. The
// optimizer works on raw Schrodinger-picture waveforms: the stored carrier
// frequencies are zero and the samples are the full field in reduced units,
// so iterations can reshape the waveform without an envelope/carrier split.
//
// The costate chi is a full hierarchy transported backward under the adjoint
// generator, chi' = -A+(t) chi, seeded at the final time by the target
// rotated out of the interaction frame (the fidelity is scored there) with
// zero auxiliaries. Field updates are immediate: arriving at each grid node
// the sweep adds
//
//   d eps_p(t_i) = -(dt / alpha) Im Tr(chi0+(t_i) [P_p, rho0(t_i)])
//
// per polarization, with rho0 the stored top matrices of the previous forward
// propagation and P_p the unit transition operator of that channel (the
// dipole moment lives in the field normalization). The sign follows the
// H = H0 - eps_p P_p coupling; dt is the quadrature weight that turns the
// gradient density into a per-sample gradient. Later backward steps integrate
// against the refreshed samples, which is what makes the scheme monotonic.
// One iteration = one backward update sweep + one forward re-propagation.

namespace qcw {

struct OctConfig {
    double alpha = 2e-4;  // field-change penalty; increments scale as 1/alpha
    int iterations = 15;
    ControlField guess;   // Schrodinger picture, zero stored carriers
    HeomConfig backend = default_heom_config();
    Mat3 rho0 = ground_state();
    Mat3 target = target_state();  // interaction-frame object
};

// Hierarchy config whose depth-0 truncation never engages the bath terms:
// propagation under it is exactly unitary (the dissipation-free backend).
HeomConfig isolated_backend(const SystemSpec& s = {});

// A_p sin^2(pi t) cos(omega_p t) sampled on an n-interval grid as a raw
// zero-carrier waveform (linear interpolation between samples). The carrier
// frequencies come from the system; envelope-equivalent area is peak/2.
ControlField oct_guess_field(double peak_y, double peak_z, const SystemSpec& s,
                             std::size_t n = 2000);

// Envelope-equivalent areas (pi/2) * integral |eps_p(t)| dt of a raw
// waveform: |cos| averages to 2/pi, so on a resonant carrier the number
// compares directly with the area rule of the envelope picture.
std::pair<double, double> waveform_areas(const ControlField& f);

// Penalized-gradient density for both channels at one time,
//   -(1/alpha) Im Tr(chi0+ [P_p, rho0]);
// the sweep multiplies by the grid spacing. Antisymmetric under swapping
// Hermitian chi0 and rho0, and identically zero when both equal the target.
std::pair<double, double> field_increment(const Mat3& chi0, const Mat3& rho0, double alpha);

// Backward transport of a costate hierarchy from state.t down to t0 under
// chi' = -A+(t) chi, recording the top matrix at every grid node. `on_node`
// (when set) runs at each node — the last one first, then down to t0 — with
// that node's fresh chi0; it may mutate the field being integrated through an
// alias, which is how the optimization applies its immediate updates. Throws
// when the costate norm grows 1e3x past its seed (an unstable update step).
struct AdjointRun {
    HierarchyState state;    // costate at t0
    std::vector<Mat3> tops;  // chi0 at every grid node, indexed by node
};
AdjointRun propagate_adjoint(const HierarchyState& chiT, const ControlField& field,
                             const HeomKernel& kernel, double t0 = 0.0,
                             const std::function<void(std::size_t, const Mat3&)>& on_node = {});

// One optimization step: a backward costate sweep applying immediate per-node
// field updates against the stored forward tops, then a forward propagation
// of the refreshed field. Returns the new field with its node-wise tops and
// final-time fidelity, ready to be iterated again.
struct OctIterate {
    ControlField field;
    std::vector<Mat3> tops;
    double fidelity = 0.0;
};
OctIterate oct_iterate(const ControlField& field, const std::vector<Mat3>& tops,
                       const HeomKernel& kernel, const OctConfig& cfg);

// Full run: record the guess, then cfg.iterations refinement steps. Entry k
// of every series describes the field after k iterations (entry 0 = guess).
struct OctRun {
    std::vector<double> fidelity;
    std::vector<double> area_y, area_z;  // waveform areas, same indexing
    std::vector<ControlField> fields;    // same indexing; back() is final
    const ControlField& final_field() const { return fields.back(); }
};
OctRun run_oct(const OctConfig& cfg);

// iteration,fidelity,area_y,area_z rows; iteration 0 describes the guess.
void write_oct_csv(const std::string& path, const OctRun& run);

} // namespace qcw
