#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qcw/gellmann.hpp"
#include "qcw/lindblad.hpp"
#include "qcw/rng.hpp"

using namespace qcw;

TEST_CASE("operator basis: Pauli and Gell-Mann, trace-orthonormal") {
    const OperatorBasis p = gell_mann_basis(2);
    CHECK(p.gens.size() == 3);
    CHECK(p.gens[0](0, 1) == cplx(1.0));         // sigma_x
    CHECK(p.gens[1](0, 1) == cplx(0.0, -1.0));   // sigma_y
    CHECK(p.gens[2](0, 0) == cplx(1.0));         // sigma_z
    CHECK(p.gens[2](1, 1) == cplx(-1.0));

    const OperatorBasis g = gell_mann_basis(3);
    CHECK(g.gens.size() == 8);
    CHECK((g.g0 - Eigen::MatrixXcd::Identity(3, 3) / std::sqrt(3.0)).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(std::abs(g.gens[i].trace()) < 1e-15);
        CHECK((g.gens[i] - g.gens[i].adjoint()).cwiseAbs().maxCoeff() < 1e-15);
        for (std::size_t j = 0; j < 8; ++j) {
            const cplx ip = (g.gens[i] * g.gens[j]).trace();
            CHECK(std::abs(ip - (i == j ? cplx(2.0) : cplx(0.0))) < 1e-14);
        }
    }
    CHECK_THROWS_AS(gell_mann_basis(4), std::invalid_argument);
}

TEST_CASE("rate function forms") {
    CHECK(RateFunction::constant(0.8)(0.3) == 0.8);
    const RateFunction poly = RateFunction::polynomial({1.0, -2.0, 3.0});
    CHECK(poly(0.5) == doctest::Approx(1.0 - 1.0 + 0.75));
    CHECK_THROWS_AS(RateFunction::polynomial({1, 2, 3, 4, 5, 6, 7}), std::invalid_argument);
    const RateFunction se = RateFunction::sine_exp(2.0, 10.0, 0.3, 1.5);
    CHECK(se(0.2) == doctest::Approx(2.0 * std::sin(2.3) * std::exp(-0.3)));
    const RateFunction tab = RateFunction::tabulated({0.0, 0.5, 1.0}, {1.0, 2.0, 0.0});
    CHECK(tab(0.25) == doctest::Approx(1.5));
    CHECK(tab(0.75) == doctest::Approx(1.0));
    CHECK(tab(-1.0) == 1.0);
    CHECK(tab(2.0) == 0.0);
    CHECK_THROWS_AS(RateFunction::tabulated({0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("default channels: operators and reduced rates") {
    const auto ch = default_channels();
    REQUIRE(ch.size() == 4);
    CHECK(ch[0].op(1, 1) == cplx(1.0));
    CHECK(ch[1].op(2, 2) == cplx(1.0));
    CHECK(ch[2].op(1, 2) == cplx(1.0));  // |1><2|: transfers 2 -> 1
    CHECK(ch[3].op(2, 1) == cplx(1.0));
    CHECK(ch[0].rate(0.5) == 1.0);
    CHECK(ch[1].rate(0.5) == 0.8);
    CHECK(ch[2].rate(0.5) == 0.36);
    CHECK(ch[3].rate(0.5) == 0.16);
}

TEST_CASE("lindblad generator: commutator limit, transfer, trace-free") {
    const SystemSpec s;
    ControlField f = constant_field(1.3, 0.7);
    const Mat3 h = build_h_rwa(f, 0.5, s);
    Mat3 rho = target_state();
    std::vector<CollapseChannel> none;
    const Mat3 iso = lindblad_rhs(rho, 0.5, h, none);
    CHECK((iso - (-I1 * (h * rho - rho * h))).cwiseAbs().maxCoeff() < 1e-15);

    // H = 0, single transfer channel |1><2| at rate g: d(rho11)/dt = g rho22
    std::vector<CollapseChannel> transfer = {
        {default_channels()[2].op, RateFunction::constant(0.36), "t"}};
    Mat3 p2 = Mat3::Zero();
    p2(2, 2) = 1.0;
    const Mat3 dr = lindblad_rhs(p2, 0.0, Mat3::Zero(), transfer);
    CHECK(dr(1, 1).real() == doctest::Approx(0.36));
    CHECK(dr(2, 2).real() == doctest::Approx(-0.36));
    CHECK(std::abs(dr(0, 0)) < 1e-15);

    Rng rng(7, "lindblad-trace");
    const auto channels = default_channels();
    for (int k = 0; k < 100; ++k) {
        Mat3 a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const Mat3 herm = 0.5 * (a + a.adjoint());
        const Mat3 d = lindblad_rhs(herm, 0.3, h, channels);
        CHECK(std::abs(d.trace()) < 1e-12);
    }

    std::vector<CollapseChannel> neg = {{transfer[0].op, RateFunction::constant(-0.1), "n"}};
    CHECK_THROWS_AS(lindblad_rhs(rho, 0.0, h, neg, /*strict*/ true), std::domain_error);
    CHECK_NOTHROW(lindblad_rhs(rho, 0.0, h, neg, /*strict*/ false));
}

TEST_CASE("field-free dephasing and transfer match closed forms") {
    const SystemSpec s;
    ControlField z = constant_field(0.0, 0.0);
    const auto all = default_channels();

    // dephasing channels only: rho12(t) = rho12(0) e^{-(g1+g2) t / 2}
    std::vector<CollapseChannel> dephase = {all[0], all[1]};
    const Trajectory td = propagate_lindblad(target_state(), z, s, dephase);
    CHECK(std::abs(td.final_rho()(1, 2)) ==
          doctest::Approx(0.5 * std::exp(-0.9)).epsilon(1e-8));
    CHECK(td.final_rho()(1, 1).real() == doctest::Approx(0.5).epsilon(1e-10));

    // transfer channels only: P2(t) relaxes to g4/(g3+g4) at rate g3+g4
    std::vector<CollapseChannel> transfer = {all[2], all[3]};
    Mat3 p2 = Mat3::Zero();
    p2(2, 2) = 1.0;
    const Trajectory tt = propagate_lindblad(p2, z, s, transfer);
    const double eq = 0.16 / 0.52;
    const double expect = eq + (1.0 - eq) * std::exp(-0.52);
    CHECK(tt.final_rho()(2, 2).real() == doctest::Approx(expect).epsilon(1e-8));
    CHECK(tt.final_rho()(1, 1).real() == doctest::Approx(1.0 - expect).epsilon(1e-8));
}

TEST_CASE("propagation preserves trace and positivity; coherence decays") {
    const SystemSpec s;
    const auto channels = default_channels();
    ControlField z = constant_field(0.0, 0.0);
    const Trajectory tr = propagate_lindblad(target_state(), z, s, channels);
    double prev = 1.0;
    for (std::size_t i = 0; i < tr.rho.size(); ++i) {
        const Mat3& r = tr.rho[i];
        CHECK(std::abs(r.trace().real() - 1.0) < 1e-8);
        const double coh = std::abs(r(1, 2));
        CHECK(coh <= prev + 1e-12);  // monotone decay, field-free
        prev = coh;
        Eigen::SelfAdjointEigenSolver<Mat3> es(r);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }

    ControlField driven = constant_field(area_rule(), area_rule());
    const Trajectory trd = propagate_lindblad(ground_state(), driven, s, channels);
    for (const Mat3& r : trd.rho) {
        CHECK(std::abs(r.trace().real() - 1.0) < 1e-8);
        Eigen::SelfAdjointEigenSolver<Mat3> es(r);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);  // CP proxy, constant rates
    }
}

TEST_CASE("constant and time-dependent rate forms agree when equal") {
    const SystemSpec s;
    ControlField f = constant_field(1.5, 1.5);
    auto with_rates = [&](const std::vector<RateFunction>& rs) {
        auto ch = default_channels();
        for (std::size_t i = 0; i < ch.size(); ++i) ch[i].rate = rs[i];
        return propagate_lindblad(ground_state(), f, s, ch).final_rho();
    };
    const Mat3 a = with_rates({RateFunction::constant(1.0), RateFunction::constant(0.8),
                               RateFunction::constant(0.36), RateFunction::constant(0.16)});
    const Mat3 b = with_rates({RateFunction::polynomial({1.0}), RateFunction::polynomial({0.8}),
                               RateFunction::polynomial({0.36}), RateFunction::polynomial({0.16})});
    const Mat3 c = with_rates(
        {RateFunction::tabulated({0.0, 1.0}, {1.0, 1.0}), RateFunction::tabulated({0.0, 1.0}, {0.8, 0.8}),
         RateFunction::tabulated({0.0, 1.0}, {0.36, 0.36}), RateFunction::tabulated({0.0, 1.0}, {0.16, 0.16})});
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a - c).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("transiently negative rates: allowed unless strict") {
    const SystemSpec s;
    ControlField z = constant_field(0.0, 0.0);
    auto ch = default_channels();
    ch[2].rate = RateFunction::sine_exp(0.5, 12.0, 0.0, 1.0);  // dips below zero
    const Trajectory tr = propagate_lindblad(target_state(), z, s, ch);
    CHECK(std::abs(tr.final_rho().trace().real() - 1.0) < 1e-8);
    CHECK_THROWS_AS(propagate_lindblad(target_state(), z, s, ch, /*strict*/ true),
                    std::domain_error);
}

TEST_CASE("step-size instability is detected") {
    const SystemSpec s;
    ControlField wild = constant_field(400.0, 0.0);
    CHECK_THROWS_AS(propagate_lindblad(ground_state(), wild, s, default_channels(), false, 1),
                    std::runtime_error);
}
