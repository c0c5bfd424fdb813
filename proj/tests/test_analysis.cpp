#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "snop/analysis.hpp"
#include "snop/linalg.hpp"

using namespace snop;

namespace {

double diff(const ComplexMatrix& a, const ComplexMatrix& b) { return sub(a, b).max_abs(); }

ComplexMatrix scalar(double v) {
    ComplexMatrix m(1, 1);
    m(0, 0) = v;
    return m;
}

Diagram gain_diagram() {
    const SpaceRef U{"U", 1}, Yf{"Yf", 1}, E{"E", 1}, Y{"Y", 1}, Yo{"Yo", 1};
    const Diagram s = make_atom("S", Signature{{U, Yf}}, Signature{{E}});
    const Diagram k = make_atom("K", Signature{{E}}, Signature{{Y}});
    const Diagram c = make_atom("C", Signature{{Y}}, Signature{{Yf, Yo}});
    return make_feedback(1, 2, make_seq(make_seq(s, k), c));
}

Environment gain_env(double kval) {
    Environment env;
    ComplexMatrix s(1, 2);
    s(0, 0) = 1.0;
    s(0, 1) = -1.0;
    ComplexMatrix c(2, 1);
    c(0, 0) = 1.0;
    c(1, 0) = 1.0;
    env.atoms = {{"S", s}, {"K", scalar(kval)}, {"C", c}};
    env.options.feedback_mode = FeedbackMode::Strict;
    return env;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
    return g;
}

}  // namespace

TEST_CASE("well_posedness classifies the unity-gain loop") {
    const Diagram d = gain_diagram();

    auto reports = well_posedness(d, gain_env(0.5));
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].kappa == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(reports[0].strict_ok);
    CHECK(reports[0].relaxed_ok);

    reports = well_posedness(d, gain_env(2.0));
    REQUIRE(reports.size() == 1);
    CHECK(!reports[0].strict_ok);
    CHECK(reports[0].relaxed_ok);  // I - M_ff is still invertible

    reports = well_posedness(d, gain_env(-1.0));
    REQUIRE(reports.size() == 1);
    CHECK(!reports[0].relaxed_ok);  // 1 + K = 0: singular loop
}

TEST_CASE("well_posedness never throws") {
    const Diagram d = gain_diagram();
    CHECK_NOTHROW(well_posedness(d, gain_env(-1.0)));
    CHECK_NOTHROW(well_posedness(d, gain_env(100.0)));
}

TEST_CASE("control_lipschitz on a smooth gain family") {
    const Diagram d = gain_diagram();
    auto env_at = [](double t) { return gain_env(0.2 + 0.3 * t); };
    auto inject_at = [](double t) { return scalar(0.2 + 0.3 * t); };
    const LipschitzReport rep = control_lipschitz(d, env_at, inject_at, linspace(0, 1, 11));
    CHECK(rep.alpha == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(rep.L == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(rep.predicted_bound == doctest::Approx(0.6).epsilon(1e-9));
    // |d/dK K/(1+K)| * |dK/dt| <= 0.3 / 1.44 < predicted bound
    CHECK(rep.empirical_max_ratio <= rep.predicted_bound + 1e-9);
    CHECK(rep.empirical_max_ratio > 0.1);
    CHECK(!rep.divergent);
}

TEST_CASE("control_lipschitz on a constant family is flat") {
    const Diagram d = gain_diagram();
    auto env_at = [](double) { return gain_env(0.4); };
    auto inject_at = [](double) { return scalar(0.4); };
    const LipschitzReport rep = control_lipschitz(d, env_at, inject_at, linspace(0, 1, 9));
    CHECK(rep.L == 0.0);
    CHECK(rep.empirical_max_ratio == 0.0);
    CHECK(!rep.divergent);
}

TEST_CASE("control_lipschitz flags a discontinuous family as divergent") {
    const Diagram d = gain_diagram();
    auto kval = [](double t) { return t < 0.5 ? 0.2 : 0.4; };
    auto env_at = [&](double t) { return gain_env(kval(t)); };
    auto inject_at = [&](double t) { return scalar(kval(t)); };
    const LipschitzReport rep = control_lipschitz(d, env_at, inject_at, linspace(0, 1, 11));
    CHECK(rep.divergent);
}

TEST_CASE("control_lipschitz refuses an ill-posed member") {
    const Diagram d = gain_diagram();
    auto env_at = [](double t) { return gain_env(0.5 + t); };  // kappa hits 1.5
    auto inject_at = [](double t) { return scalar(0.5 + t); };
    CHECK_THROWS_AS(control_lipschitz(d, env_at, inject_at, linspace(0, 1, 5)),
                    IllPosedFeedback);
}

TEST_CASE("control_derivative matches the analytic derivative") {
    const Diagram d = gain_diagram();
    auto env_at = [](double t) { return gain_env(t); };
    const DerivativeReport rep = control_derivative(d, env_at, 0.5, 1e-3);
    // d/dK [K/(1+K)] = 1/(1+K)^2 = 4/9 at K = 1/2
    REQUIRE(rep.derivative.rows() == 1);
    CHECK(std::abs(rep.derivative(0, 0) - cplx(4.0 / 9.0)) < 1e-6);
    CHECK(rep.error_estimate < 1e-6);

    // the Richardson error estimate shrinks with h (second-order stencil)
    const DerivativeReport coarse = control_derivative(d, env_at, 0.5, 1e-2);
    CHECK(rep.error_estimate < coarse.error_estimate);
}

TEST_CASE("spectral flow of a single upward crossing is +1") {
    const SpectralFlowReport rep = spectral_flow(sf_path_upward(101), false);
    CHECK(rep.sf == 1);
    REQUIRE(rep.crossings.size() == 1);
    CHECK(rep.crossings[0].direction == 1);
    CHECK(rep.crossings[0].t == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rep.kernel_dim_ok);
    CHECK(!rep.orientable.has_value());  // not a loop
}

TEST_CASE("spectral flow of a gapped loop is 0 with no crossings") {
    const SpectralFlowReport rep = spectral_flow(sf_loop_constant_gap(101), true);
    CHECK(rep.sf == 0);
    CHECK(rep.crossings.empty());
    CHECK(!rep.orientable.has_value());  // no kernel anywhere
}

TEST_CASE("the Moebius kernel loop is nonorientable with sf = 0") {
    const SpectralFlowReport rep = spectral_flow(sf_loop_nonorientable(201), true);
    CHECK(rep.sf == 0);
    CHECK(rep.kernel_dim_ok);
    REQUIRE(rep.orientable.has_value());
    CHECK(*rep.orientable == false);
}

TEST_CASE("random parity loops are orientable with even flow") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SpectralFlowReport rep = spectral_flow(sf_random_parity_loop(seed, 201), true);
        CAPTURE(seed);
        CHECK(rep.sf == 0);
        CHECK(rep.sf % 2 == 0);
        REQUIRE(rep.orientable.has_value());
        CHECK(*rep.orientable == true);
    }
}

TEST_CASE("an unresolved zero-touch raises AmbiguousCrossing") {
    // lambda(t) = (2t-1)^2 touches zero without a sign change
    std::vector<ComplexMatrix> path;
    for (int k = 0; k < 101; ++k) {
        const double t = k / 100.0;
        path.push_back(scalar((2 * t - 1) * (2 * t - 1)));
    }
    CHECK_THROWS_AS(spectral_flow(path, false), AmbiguousCrossing);
}

TEST_CASE("non-Hermitian samples are rejected") {
    ComplexMatrix a(2, 2);
    a(0, 1) = 1.0;  // strictly upper triangular: not Hermitian
    CHECK_THROWS_AS(spectral_flow({a, a}, false), std::invalid_argument);
}

TEST_CASE("PDE case: operators have the advertised structure") {
    for (int n : {4, 16}) {
        const PdeCase pc = build_pde_case(n, 0.5);
        CAPTURE(n);
        // ||G|| = gain, G Hermitian positive
        CHECK(op_norm_value(pc.g) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(diff(pc.g, adjoint(pc.g)) < 1e-12);
        // K is an orthogonal projector onto the lower half of the spectrum
        CHECK(diff(matmul(pc.k, pc.k), pc.k) < 1e-10);
        CHECK(diff(pc.k, adjoint(pc.k)) < 1e-12);
        CHECK(op_norm_value(pc.k) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("PDE case: closed loop matches the resolvent formula") {
    for (int n : {4, 16, 64}) {
        const PdeCase pc = build_pde_case(n, 0.5);
        CAPTURE(n);
        const ComplexMatrix cl = eval(pc.cl, pc.env).matrix;
        const ComplexMatrix oracle = solve(
            add(ComplexMatrix::identity(static_cast<std::size_t>(n)), matmul(pc.g, pc.k)),
            pc.g);
        CHECK(diff(cl, oracle) < 1e-9);
        // open-loop chain d1 evaluates to G K K G
        const ComplexMatrix d1 = eval(pc.d1, pc.env).matrix;
        CHECK(diff(d1, matmul(matmul(matmul(pc.g, pc.k), pc.k), pc.g)) < 1e-12);
    }
}

TEST_CASE("PDE case: strict mode accepts exactly gain < 1") {
    const PdeCase ok = build_pde_case(16, 0.5);
    Environment strict = ok.env;
    strict.options.feedback_mode = FeedbackMode::Strict;
    CHECK_NOTHROW(eval(ok.cl, strict));

    const PdeCase bad = build_pde_case(16, 1.5);
    strict = bad.env;
    strict.options.feedback_mode = FeedbackMode::Strict;
    CHECK_THROWS_AS(eval(bad.cl, strict), IllPosedFeedback);
}

TEST_CASE("PDE case: the projector loop d2 is singular") {
    const PdeCase pc = build_pde_case(8, 0.5);
    CHECK_THROWS_AS(eval(pc.d2, pc.env), SingularLoop);
    const auto reports = well_posedness(pc.d2, pc.env);
    REQUIRE(reports.size() == 1);
    CHECK(!reports[0].relaxed_ok);
}
