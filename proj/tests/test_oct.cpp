#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>

#include "qcw/csvio.hpp"
#include "qcw/oct.hpp"
#include "qcw/rng.hpp"

using namespace qcw;

namespace {

Mat3 random_hermitian(Rng& rng) {
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        m(r, r) = rng.uniform(-1.0, 1.0);
        for (int c = r + 1; c < 3; ++c) {
            m(r, c) = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            m(c, r) = std::conj(m(r, c));
        }
    }
    return m;
}

cplx pair_product(const std::vector<Mat3>& x, const std::vector<Mat3>& r) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i].adjoint() * r[i]).trace();
    return acc;
}

} // namespace

TEST_CASE("the field increment follows the penalized-gradient formula") {
    Rng rng(31, "oct-increment", 0);

    SUBCASE("doubling the penalty halves both channels exactly") {
        for (int trial = 0; trial < 10; ++trial) {
            const Mat3 chi = random_hermitian(rng), rho = random_hermitian(rng);
            const auto [y1, z1] = field_increment(chi, rho, 2e-4);
            const auto [y2, z2] = field_increment(chi, rho, 4e-4);
            CHECK(y2 == 0.5 * y1);
            CHECK(z2 == 0.5 * z1);
        }
    }

    SUBCASE("swapping Hermitian state and costate flips the sign") {
        for (int trial = 0; trial < 20; ++trial) {
            const Mat3 chi = random_hermitian(rng), rho = random_hermitian(rng);
            const auto [yf, zf] = field_increment(chi, rho, 1.0);
            const auto [yb, zb] = field_increment(rho, chi, 1.0);
            CHECK(yf == doctest::Approx(-yb).epsilon(1e-12).scale(1.0));
            CHECK(zf == doctest::Approx(-zb).epsilon(1e-12).scale(1.0));
        }
    }

    SUBCASE("a converged pair is a stationary point") {
        const Mat3 t = target_state();
        const auto [gy, gz] = field_increment(t, t, 2e-4);
        CHECK(std::abs(gy) <= 1e-12);
        CHECK(std::abs(gz) <= 1e-12);
    }

    SUBCASE("a non-positive penalty is rejected") {
        const Mat3 t = target_state();
        CHECK_THROWS_AS((void)field_increment(t, t, 0.0), std::invalid_argument);
        CHECK_THROWS_AS((void)field_increment(t, t, -1.0), std::invalid_argument);
    }
}

TEST_CASE("backward transport retraces unitary dynamics and preserves the pairing") {
    SystemSpec sys;

    SUBCASE("without dissipation the costate rides the forward trajectory") {
        const HeomKernel kernel(isolated_backend(sys));
        const ControlField f = oct_guess_field(3.3, 2.1, sys, 400);
        const HeomRun fwd = propagate_heom(ground_state(), f, kernel, 0.0, 1.0);
        // chi satisfies the same equation of motion as rho when the dynamics
        // is unitary, so seeding it with rho(T) must reproduce rho(t) all the
        // way back to t = 0 up to accumulated truncation (the backward step
        // inverts the forward one to O(h^5); a sign or stage-order defect
        // would miss by orders of magnitude)
        const AdjointRun bwd =
            propagate_adjoint(kernel.cold_start(fwd.traj.rho.back(), 1.0), f, kernel, 0.0);
        REQUIRE(bwd.tops.size() == f.grid.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < bwd.tops.size(); ++i)
            worst = std::max(worst, (bwd.tops[i] - fwd.traj.rho[i]).cwiseAbs().maxCoeff());
        CHECK(worst <= 1e-6);
        CHECK(bwd.state.t == f.grid.front());
    }

    SUBCASE("the pairing with a forward hierarchy is conserved") {
        HeomConfig hc = default_heom_config();
        hc.depth = 1;
        const HeomKernel kernel(hc);
        ControlField f = oct_guess_field(2.5, 2.5, sys, 100);

        Rng rng(7, "oct-pairing", 0);
        HierarchyState r0 = kernel.cold_start(ground_state(), 0.0);
        HierarchyState xT = kernel.cold_start(target_state(), 1.0);
        for (auto& a : r0.ados) a = 0.3 * random_hermitian(rng);
        for (auto& a : xT.ados) a = 0.3 * random_hermitian(rng);

        const HeomRun fwd = propagate_heom(r0, f, kernel, 1.0);
        const AdjointRun bwd = propagate_adjoint(xT, f, kernel, 0.0);
        const cplx at_end = pair_product(xT.ados, fwd.state.ados);
        const cplx at_start = pair_product(bwd.state.ados, r0.ados);
        CHECK(std::abs(at_end - at_start) <= 1e-8 * std::max(1.0, std::abs(at_end)));
    }

    SUBCASE("a costate from a different hierarchy is rejected") {
        const HeomKernel kernel(isolated_backend(sys));
        HeomConfig other = default_heom_config();
        other.depth = 1;
        const HeomKernel other_kernel(other);
        const ControlField f = oct_guess_field(1.0, 1.0, sys, 100);
        CHECK_THROWS_AS(
            (void)propagate_adjoint(other_kernel.cold_start(target_state(), 1.0), f, kernel, 0.0),
            std::invalid_argument);
    }
}

TEST_CASE("one refinement improves a detuned guess and keeps the field finite") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = isolated_backend(sys);
    cfg.iterations = 1;

    SUBCASE("from eighty percent of the area rule") {
        const double peak = 2.0 * 0.8 * area_rule();
        cfg.guess = oct_guess_field(peak, peak, sys, 2000);
        const OctRun run = run_oct(cfg);
        REQUIRE(run.fidelity.size() == 2);
        CHECK(run.fidelity[1] > run.fidelity[0]);
        for (std::size_t i = 0; i < run.final_field().env_y.size(); ++i) {
            CHECK(std::isfinite(run.final_field().env_y[i]));
            CHECK(std::isfinite(run.final_field().env_z[i]));
        }
    }

    SUBCASE("from the area rule itself") {
        cfg.guess = oct_guess_field(4.443, 4.443, sys, 2000);
        const OctRun run = run_oct(cfg);
        CHECK(run.fidelity[0] > 0.999);  // the analytic solution is already close
        CHECK(run.fidelity[1] >= run.fidelity[0]);
    }

    SUBCASE("a stored trajectory of the wrong length is rejected") {
        cfg.guess = oct_guess_field(4.443, 4.443, sys, 100);
        const HeomKernel kernel(cfg.backend);
        const std::vector<Mat3> short_tops(50, Mat3::Zero());
        CHECK_THROWS_AS((void)oct_iterate(cfg.guess, short_tops, kernel, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("fidelity is non-decreasing across fifteen refinements without dissipation") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = isolated_backend(sys);
    const double peak = 2.0 * 0.8 * area_rule();
    cfg.guess = oct_guess_field(peak, peak, sys, 2000);

    const OctRun run = run_oct(cfg);
    REQUIRE(run.fidelity.size() == 16);
    REQUIRE(run.fields.size() == 16);
    for (std::size_t k = 1; k < run.fidelity.size(); ++k)
        CHECK(run.fidelity[k] >= run.fidelity[k - 1] - 1e-6);
    CHECK(run.fidelity.front() < 0.95);
    CHECK(run.fidelity.back() > 0.999);
}

TEST_CASE("refinements leave the zero field untouched") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = isolated_backend(sys);
    cfg.iterations = 2;
    cfg.guess = oct_guess_field(0.0, 0.0, sys, 2000);

    const OctRun run = run_oct(cfg);
    // rho never leaves the ground state, so every increment is the imaginary
    // part of a trace that vanishes identically: the zero field is a fixed
    // point and its fidelity stays exactly zero
    for (double fid : run.fidelity) CHECK(fid == 0.0);
    for (std::size_t i = 0; i < run.final_field().env_y.size(); ++i) {
        CHECK(run.final_field().env_y[i] == 0.0);
        CHECK(run.final_field().env_z[i] == 0.0);
    }
}

TEST_CASE("converged areas land on odd multiples of the area rule") {
    SystemSpec sys;
    const double A = area_rule();
    struct Point {
        double frac, mult;
    };
    for (const auto& [frac, mult] : {Point{0.75, 1.0}, Point{0.90, 1.0}, Point{0.80, 3.0},
                                     Point{0.85, 3.0}}) {
        CAPTURE(frac);
        CAPTURE(mult);
        OctConfig cfg;
        cfg.backend = isolated_backend(sys);
        cfg.iterations = 40;
        const double peak = 2.0 * frac * mult * A;
        cfg.guess = oct_guess_field(peak, peak, sys, 2000);
        const OctRun run = run_oct(cfg);
        CHECK(run.fidelity.back() > 0.999);
        CHECK(std::abs(run.area_y.back() / (mult * A) - 1.0) < 0.02);
        CHECK(std::abs(run.area_z.back() / (mult * A) - 1.0) < 0.02);
    }
}

TEST_CASE("an unstable update step is rejected with diagnostics") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = isolated_backend(sys);
    cfg.alpha = 1e-12;  // increments thousands of times the field scale
    cfg.iterations = 1;
    cfg.guess = oct_guess_field(4.443, 4.443, sys, 500);
    CHECK_THROWS_WITH_AS((void)run_oct(cfg), doctest::Contains("costate norm"),
                         std::runtime_error);
}

TEST_CASE("a dissipative refinement grows both channels, the slower one harder") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = default_heom_config();
    cfg.backend.depth = 2;  // shallow hierarchy keeps the check fast
    cfg.iterations = 4;
    cfg.guess = oct_guess_field(4.443, 4.443, sys, 2000);

    const OctRun run = run_oct(cfg);
    REQUIRE(run.fidelity.size() == 5);
    for (std::size_t k = 1; k < run.fidelity.size(); ++k) {
        CHECK(run.fidelity[k] > run.fidelity[k - 1]);
        CHECK(run.area_y[k] > run.area_y[k - 1]);
        CHECK(run.area_z[k] > run.area_z[k - 1]);
    }
    CHECK(run.fidelity.front() < 0.70);
    CHECK(run.fidelity.back() > 0.80);
    // the guess drives both channels equally; the optimizer reshapes them
    // apart, pushing harder where the bath bites harder
    CHECK(run.area_z.back() - run.area_y.back() > 0.1);
}

TEST_CASE("run configurations are validated") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = isolated_backend(sys);
    cfg.guess = oct_guess_field(1.0, 1.0, sys, 2000);

    SUBCASE("penalty and iteration counts") {
        OctConfig bad = cfg;
        bad.alpha = 0.0;
        CHECK_THROWS_AS((void)run_oct(bad), std::invalid_argument);
        bad = cfg;
        bad.iterations = -1;
        CHECK_THROWS_AS((void)run_oct(bad), std::invalid_argument);
    }

    SUBCASE("the optimizer only drives raw Schrodinger fields") {
        OctConfig bad = cfg;
        bad.guess = sine_squared_field(1.0, 1.0, 100);  // RWA envelope pair
        CHECK_THROWS_AS((void)run_oct(bad), std::invalid_argument);
    }

    SUBCASE("the grid must resolve the physical carriers") {
        OctConfig bad = cfg;
        bad.guess = oct_guess_field(1.0, 1.0, sys, 20);  // dt = 0.05 > pi/omega
        CHECK_THROWS_AS((void)run_oct(bad), std::invalid_argument);
        CHECK_THROWS_AS((void)oct_guess_field(1.0, 1.0, sys, 1), std::invalid_argument);
    }
}

TEST_CASE("the refinement trace round-trips through its CSV") {
    SystemSpec sys;
    OctConfig cfg;
    cfg.backend = isolated_backend(sys);
    cfg.iterations = 2;
    cfg.guess = oct_guess_field(3.5, 3.5, sys, 2000);
    const OctRun run = run_oct(cfg);

    const std::string path = "oct_trace_test.csv";
    write_oct_csv(path, run);
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    REQUIRE(fp != nullptr);
    char line[256];
    REQUIRE(std::fgets(line, sizeof line, fp) != nullptr);
    CHECK(std::string(line) == "iteration,fidelity,area_y,area_z\n");
    for (std::size_t k = 0; k < run.fidelity.size(); ++k) {
        REQUIRE(std::fgets(line, sizeof line, fp) != nullptr);
        std::size_t it = 0;
        double fid = 0.0, ay = 0.0, az = 0.0;
        REQUIRE(std::sscanf(line, "%zu,%lf,%lf,%lf", &it, &fid, &ay, &az) == 4);
        CHECK(it == k);
        CHECK(fid == run.fidelity[k]);
        CHECK(ay == run.area_y[k]);
        CHECK(az == run.area_z[k]);
    }
    CHECK(std::fgets(line, sizeof line, fp) == nullptr);
    std::fclose(fp);
    std::remove(path.c_str());

    // the raw-waveform corner of the field CSV format: zero carriers, linear
    // interpolation, Schrodinger picture
    const std::string fpath = "oct_field_test.csv";
    write_field_csv(fpath, run.final_field());
    const ControlField back = read_field_csv(fpath);
    std::remove(fpath.c_str());
    CHECK(back.picture == Picture::Schrodinger);
    CHECK(back.interp == EnvelopeInterp::Linear);
    CHECK(back.omega_y == 0.0);
    CHECK(back.omega_z == 0.0);
    REQUIRE(back.env_y.size() == run.final_field().env_y.size());
    for (std::size_t i = 0; i < back.env_y.size(); ++i) {
        CHECK(back.env_y[i] == run.final_field().env_y[i]);
        CHECK(back.env_z[i] == run.final_field().env_z[i]);
    }
}
