#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qcw/gellmann.hpp"
#include "qcw/heom.hpp"
#include "qcw/lindblad.hpp"
#include "qcw/model.hpp"

// Time-dependent decoherence matrix extracted from a dynamical map: propagate
// the nine orthonormal basis operators B_0 = I/sqrt(3), B_j = G_j/sqrt(2)
// through the field-free map, form F_ab(t) = Tr[B_a^+ Phi_t[B_b]], take the
// time-local generator L(t) = F'(t) F(t)^-1, and project its dissipative part
// onto the Gell-Mann form
//
//   L[rho] = -i[H, rho] + sum_jk D_jk (G_j rho G_k - 1/2 {G_k G_j, rho}).
//
// The eigenvalues of D(t) are the canonical decay rates; their sum going
// transiently negative is the non-Markovianity witness.

namespace qcw {

// one basis operator pushed through the map: samples of Phi_t[B] and, when the
// backend can provide it, the exact d/dt (otherwise central differences)
struct MapTrajectory {
    std::vector<double> t;
    std::vector<Mat3> phi;
    std::vector<Mat3> phi_dot;  // empty -> numerical differentiation
};

using MapProvider = std::function<MapTrajectory(const Mat3& initial)>;

// field-free hierarchy map at the kernel's configured depth (exact derivatives)
MapProvider heom_map_provider(const HeomKernel& kernel, std::size_t n_intervals = 100);

// field-free Lindblad map with the given channels (exact derivatives)
MapProvider lindblad_map_provider(const std::vector<CollapseChannel>& channels,
                                  const SystemSpec& sys, std::size_t n_intervals = 100);

struct DecoherenceMatrix {
    std::vector<double> t;
    std::vector<Eigen::Matrix<cplx, 8, 8>> D;           // Gell-Mann convention
    std::vector<std::array<double, 8>> canonical_rates;  // sorted descending
    std::vector<double> rate_sum;
};

// Runs the provider over the nine basis operators and assembles D(t). The
// default rotates into the interaction frame of H0 first, which cancels the
// bare -i[H0, .] and leaves the slowly varying dissipative generator; pass
// interaction_frame = false to analyze the Schrodinger-picture generator.
// Throws on a non-invertible F, on undersampled data in the central-difference
// path, and on non-Hermitian D beyond 1e-8.
DecoherenceMatrix decoherence_matrix(const MapProvider& provider, const SystemSpec& sys,
                                     bool interaction_frame = true);

struct CanonicalRates {
    std::vector<std::array<double, 8>> rates;  // per sample, sorted descending
    std::vector<double> sum;
};
CanonicalRates canonical_rates(const std::vector<Eigen::Matrix<cplx, 8, 8>>& D);

// Reassemble the dissipator's action on rho from D — the inverse direction,
// used to verify extraction round trips.
Mat3 apply_dissipator(const Eigen::Matrix<cplx, 8, 8>& D, const Mat3& rho);

} // namespace qcw
