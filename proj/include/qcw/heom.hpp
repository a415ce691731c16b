#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcw/bath.hpp"
#include "qcw/model.hpp"

// Hierarchy-of-auxiliary-density-operators propagation. Always Schrodinger
// picture with explicit carriers (no RWA variant). The two baths' exponential
// modes are concatenated; each mode k carries the coupling operator of its
// bath. For C(t) = sum_k alpha_k e^{i gamma_k t}, C*(t) = sum_k alpha~_k
// e^{i gamma_k t}, the equation of motion for ADO rho_n is
//
//   d rho_n/dt = -i[H(t), rho_n] + i (sum_k n_k gamma_k) rho_n
//                - i sum_k [S_k, rho_{n+e_k}]
//                - i sum_k n_k (alpha_k S_k rho_{n-e_k} - alpha~_k rho_{n-e_k} S_k)
//
// with indices beyond the truncation depth read as zero.

namespace qcw {

struct HierarchyTable {
    int K = 0;
    int L = 0;
    std::vector<std::vector<std::uint8_t>> indices;  // graded-lex order
    std::vector<std::int32_t> up;    // idx*K + k -> offset of n+e_k, -1 at boundary
    std::vector<std::int32_t> down;  // idx*K + k -> offset of n-e_k, -1 when n_k=0
    std::size_t size() const { return indices.size(); }
};

// Deterministic graded-lexicographic enumeration of {n : sum n_k <= L} with
// resolved neighbor offsets. `cap` guards against runaway index counts.
HierarchyTable enumerate_ados(int K, int L, std::size_t cap = 2000000);

struct HeomConfig {
    SystemSpec system;
    std::vector<BathSpec> baths;
    std::vector<BathExpansion> expansions;  // parallel to baths
    int depth = 6;
    int substeps = 0;            // per grid interval; 0 = auto from the 0.05 rule
    std::size_t max_ados = 2000000;
};

// Two default baths expanded at 4 modes each (no Matsubara), depth 6.
HeomConfig default_heom_config();

struct HierarchyState {
    std::vector<Mat3> ados;  // graded-lex order; ados[0] is the physical rho
    double t = 0.0;
    std::string config_hash;  // hex fingerprint of (expansions, depth, system)
};

class HeomKernel {
  public:
    explicit HeomKernel(const HeomConfig& cfg);

    const HierarchyTable& table() const { return table_; }
    const std::string& config_hash() const { return hash_; }
    int n_modes() const { return int(gamma_.size()); }

    // substep count for one grid interval: max(|gamma_k|, |H|) dt <= 0.05
    int substeps_per_interval(const ControlField& f) const;

    // out = A(in) with the system Hamiltonian h frozen at the call time
    void rhs(const std::vector<Mat3>& in, std::vector<Mat3>& out, const Mat3& h) const;
    // out = A+(in), the adjoint of rhs under <chi, rho> = sum Tr(chi_n+ rho_n)
    void rhs_adjoint(const std::vector<Mat3>& in, std::vector<Mat3>& out, const Mat3& h) const;

    HierarchyState cold_start(const Mat3& rho0, double t0 = 0.0) const;

    const HeomConfig& config() const { return cfg_; }

  private:
    HeomConfig cfg_;
    HierarchyTable table_;
    std::string hash_;
    std::vector<cplx> alpha_, alpha_tilde_, gamma_;  // concatenated modes
    std::vector<int> mode_bath_;                     // mode -> bath
    std::vector<int> bath_begin_, bath_end_;         // bath -> mode range
    std::vector<Mat3> coupling_;                     // per bath
    std::vector<cplx> iw_;                           // per index: i sum n_k gamma_k
    double gamma_max_ = 0.0;
};

struct HeomRun {
    HierarchyState state;        // final hierarchy (caller may continue from it)
    Trajectory traj;             // physical-rho samples on the grid
    std::vector<Mat3> rho_dot;   // exact d rho_0/dt at the same samples
};

// Cold start from a (density or operator-valued) 3x3 initial condition at
// grid time t0, advanced to t1 along the field grid.
HeomRun propagate_heom(const Mat3& rho0, const ControlField& field, const HeomKernel& kernel,
                       double t0 = 0.0, double t1 = 1.0);
// Warm start: continues exactly from `start` (config_hash checked) to t1.
HeomRun propagate_heom(const HierarchyState& start, const ControlField& field,
                       const HeomKernel& kernel, double t1);

// Checkpoint layout: magic "QCWHEOM1", version u32, config_hash (32 raw
// bytes), K u32, L u32, t double, then for every ADO in graded-lex order the
// row-major real parts (9 doubles) followed by the row-major imaginary parts
// (9 doubles). Little-endian IEEE-754 throughout.
std::vector<std::uint8_t> checkpoint(const HierarchyState& s, const HeomKernel& kernel);
HierarchyState restore(const std::vector<std::uint8_t>& bytes, const HeomKernel& kernel);

void save_checkpoint_file(const std::string& path, const HierarchyState& s,
                          const HeomKernel& kernel);
HierarchyState load_checkpoint_file(const std::string& path, const HeomKernel& kernel);

} // namespace qcw
