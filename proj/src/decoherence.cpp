#include "qcw/decoherence.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace qcw {

namespace {

using Mat8 = Eigen::Matrix<cplx, 8, 8>;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;

// HS-orthonormal Hermitian basis: I/sqrt(3), then the generators / sqrt(2)
std::vector<Mat3> basis_ops() {
    const OperatorBasis gm = gell_mann_basis(3);
    std::vector<Mat3> b;
    b.push_back(Mat3(gm.g0));
    for (const auto& g : gm.gens) b.push_back(Mat3(g / std::sqrt(2.0)));
    return b;
}

ControlField quiet_field(std::size_t n) {
    ControlField f = constant_field(0.0, 0.0, n);
    f.picture = Picture::Schrodinger;
    return f;
}

} // namespace

MapProvider heom_map_provider(const HeomKernel& kernel, std::size_t n_intervals) {
    const HeomKernel* k = &kernel;  // caller keeps the kernel alive
    return [k, n_intervals](const Mat3& initial) {
        const HeomRun run = propagate_heom(initial, quiet_field(n_intervals), *k);
        MapTrajectory out;
        out.t = run.traj.t;
        out.phi = run.traj.rho;
        out.phi_dot = run.rho_dot;
        return out;
    };
}

MapProvider lindblad_map_provider(const std::vector<CollapseChannel>& channels,
                                  const SystemSpec& sys, std::size_t n_intervals) {
    return [channels, sys, n_intervals](const Mat3& initial) {
        const ControlField f = quiet_field(n_intervals);
        const Trajectory tr = propagate_lindblad(initial, f, sys, channels);
        MapTrajectory out;
        out.t = tr.t;
        out.phi = tr.rho;
        out.phi_dot.reserve(tr.t.size());
        for (std::size_t i = 0; i < tr.t.size(); ++i)
            out.phi_dot.push_back(
                lindblad_rhs(tr.rho[i], tr.t[i], build_h(f, tr.t[i], sys), channels));
        return out;
    };
}

DecoherenceMatrix decoherence_matrix(const MapProvider& provider, const SystemSpec& sys,
                                     bool interaction_frame) {
    const std::vector<Mat3> B = basis_ops();

    std::vector<MapTrajectory> trajs;
    trajs.reserve(B.size());
    for (const auto& b : B) trajs.push_back(provider(b));

    const std::vector<double>& t = trajs[0].t;
    const std::size_t ns = t.size();
    if (ns < 3) throw std::invalid_argument("decoherence_matrix: need >= 3 time samples");
    const bool exact = !trajs[0].phi_dot.empty();
    for (const auto& tr : trajs) {
        if (tr.t.size() != ns || tr.phi.size() != ns)
            throw std::invalid_argument("decoherence_matrix: provider grids disagree");
        for (std::size_t i = 0; i < ns; ++i)
            if (std::abs(tr.t[i] - t[i]) > 1e-12)
                throw std::invalid_argument("decoherence_matrix: provider grids disagree");
        if ((tr.phi_dot.empty() && exact) || (!tr.phi_dot.empty() && !exact))
            throw std::invalid_argument(
                "decoherence_matrix: mixed exact/numerical derivative trajectories");
    }

    const Mat3 h0 = build_h0(sys);
    std::vector<Mat9> F(ns), Fd(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        for (std::size_t beta = 0; beta < 9; ++beta) {
            const Mat3& phi = trajs[beta].phi[i];
            const Mat3 phiI = interaction_frame ? to_interaction_frame(phi, sys, t[i]) : phi;
            for (std::size_t a = 0; a < 9; ++a)
                F[i](Eigen::Index(a), Eigen::Index(beta)) = (B[a].adjoint() * phiI).trace();
            if (exact) {
                const Mat3& pd = trajs[beta].phi_dot[i];
                // d/dt (U phi U+) = i[H0, phi_I] + U (d phi/dt) U+
                const Mat3 pdI = interaction_frame
                                     ? Mat3(to_interaction_frame(pd, sys, t[i]) +
                                            I1 * (h0 * phiI - phiI * h0))
                                     : pd;
                for (std::size_t a = 0; a < 9; ++a)
                    Fd[i](Eigen::Index(a), Eigen::Index(beta)) = (B[a].adjoint() * pdI).trace();
            }
        }
    }

    if (!exact) {
        // resolution guard: successive samples must be correlated for central
        // differences to mean anything (curvature per step well below norm)
        double fmax = 1e-300, curv = 0.0;
        for (const auto& f : F) fmax = std::max(fmax, f.cwiseAbs().maxCoeff());
        for (std::size_t i = 1; i + 1 < ns; ++i)
            curv = std::max(curv, (F[i + 1] - 2.0 * F[i] + F[i - 1]).cwiseAbs().maxCoeff());
        if (curv > 0.5 * fmax)
            throw std::runtime_error(
                "decoherence_matrix: map samples too coarse for numerical differentiation "
                "— refine the provider grid or supply exact derivatives");
        const double dt = t[1] - t[0];
        Fd[0] = (-3.0 * F[0] + 4.0 * F[1] - F[2]) / (2.0 * dt);
        for (std::size_t i = 1; i + 1 < ns; ++i) Fd[i] = (F[i + 1] - F[i - 1]) / (2.0 * dt);
        Fd[ns - 1] = (3.0 * F[ns - 1] - 4.0 * F[ns - 2] + F[ns - 3]) / (2.0 * dt);
    }

    DecoherenceMatrix dm;
    dm.t = t;
    dm.D.reserve(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        const Eigen::JacobiSVD<Mat9> svd(F[i]);
        if (svd.singularValues()(8) < 1e-10 * svd.singularValues()(0))
            throw std::runtime_error("decoherence_matrix: map matrix is singular at t=" +
                                     std::to_string(t[i]));
        const Mat9 L = Fd[i] * F[i].inverse();

        // L acting on each basis op, as concrete 3x3 matrices
        std::vector<Mat3> LB(9, Mat3::Zero());
        for (int bcol = 0; bcol < 9; ++bcol)
            for (int arow = 0; arow < 9; ++arow) LB[bcol] += L(arow, bcol) * B[arow];

        // Choi matrix C = sum_mn |m><n| (x) L[|m><n|], with
        // L[|m><n|] = sum_b conj(B_b(m,n)) LB_b
        Mat9 C = Mat9::Zero();
        for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
                Mat3 lmn = Mat3::Zero();
                for (int b = 0; b < 9; ++b) lmn += std::conj(B[b](m, n)) * LB[b];
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) C(3 * m + r, 3 * n + c) = lmn(r, c);
            }

        // q_ab = <v_a| C |v_b> with v_a[(m,r)] = B_a(r,m); the traceless block
        // of q is the dissipator coefficient matrix over B_j = G_j/sqrt(2),
        // so D over the G_j themselves is q/2
        Mat9 V;
        for (int a = 0; a < 9; ++a)
            for (int m = 0; m < 3; ++m)
                for (int r = 0; r < 3; ++r) V(3 * m + r, a) = B[a](r, m);
        const Mat9 q = V.adjoint() * C * V;
        const Mat8 D = q.block<8, 8>(1, 1) / 2.0;

        const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
        if ((D - D.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw std::runtime_error("decoherence_matrix: D(t) not Hermitian at t=" +
                                     std::to_string(t[i]) + " — corrupted map data");
        dm.D.push_back(0.5 * (D + D.adjoint()));
    }

    const CanonicalRates cr = canonical_rates(dm.D);
    dm.canonical_rates = cr.rates;
    dm.rate_sum = cr.sum;
    return dm;
}

CanonicalRates canonical_rates(const std::vector<Eigen::Matrix<cplx, 8, 8>>& D) {
    CanonicalRates out;
    out.rates.reserve(D.size());
    out.sum.reserve(D.size());
    for (const auto& d : D) {
        const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
        if ((d - d.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw std::runtime_error("canonical_rates: non-Hermitian decoherence matrix");
        Eigen::SelfAdjointEigenSolver<Mat8> es(0.5 * (d + d.adjoint()));
        std::array<double, 8> r{};
        for (int k = 0; k < 8; ++k) r[std::size_t(7 - k)] = es.eigenvalues()(k);  // descending
        out.rates.push_back(r);
        out.sum.push_back(d.trace().real());
    }
    return out;
}

Mat3 apply_dissipator(const Eigen::Matrix<cplx, 8, 8>& D, const Mat3& rho) {
    const OperatorBasis gm = gell_mann_basis(3);
    Mat3 out = Mat3::Zero();
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k) {
            if (D(j, k) == cplx(0.0, 0.0)) continue;
            const Mat3 gj = gm.gens[std::size_t(j)], gk = gm.gens[std::size_t(k)];
            const Mat3 kj = gk * gj;
            out += D(j, k) * (gj * rho * gk - 0.5 * (kj * rho + rho * kj));
        }
    return out;
}

} // namespace qcw
