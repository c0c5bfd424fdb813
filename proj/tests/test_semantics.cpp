#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "snop/semantics.hpp"
#include "snop/rewrite.hpp"

#include "support/diagram_gen.hpp"

using namespace snop;

namespace {

const SpaceRef H{"H", 2};
const SpaceRef K3{"K", 3};
const Signature sH{{H}};
const Signature sK{{K3}};
const Signature sHK{{H, K3}};

double diff(const ComplexMatrix& a, const ComplexMatrix& b) { return sub(a, b).max_abs(); }

ComplexMatrix scalar(double v) {
    ComplexMatrix m(1, 1);
    m(0, 0) = v;
    return m;
}

/// Unity negative feedback y = K(u - y): closed map is K/(1+K).
Diagram gain_diagram() {
    const SpaceRef U{"U", 1}, Yf{"Yf", 1}, E{"E", 1}, Y{"Y", 1}, Yo{"Yo", 1};
    const Diagram s = make_atom("S", Signature{{U, Yf}}, Signature{{E}});
    const Diagram k = make_atom("K", Signature{{E}}, Signature{{Y}});
    const Diagram c = make_atom("C", Signature{{Y}}, Signature{{Yf, Yo}});
    return make_feedback(1, 2, make_seq(make_seq(s, k), c));
}

Environment gain_env(double kval, FeedbackMode mode) {
    Environment env;
    ComplexMatrix s(1, 2);
    s(0, 0) = 1.0;
    s(0, 1) = -1.0;
    ComplexMatrix c(2, 1);
    c(0, 0) = 1.0;
    c(1, 0) = 1.0;
    env.atoms.emplace("S", s);
    env.atoms.emplace("K", scalar(kval));
    env.atoms.emplace("C", c);
    env.options.feedback_mode = mode;
    return env;
}

Environment ctrl_env(std::uint64_t seed) {
    Rng rng(seed);
    Environment env;
    env.monoid = random_cyclic_monoid(rng, {"u", "v"}, {{"H", 2}, {"K", 3}});
    env.monoid->validate(1e-9);
    ComplexMatrix g(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) g(i, j) = rng.gaussian();
    env.atoms.emplace("G", g);
    return env;
}

}  // namespace

TEST_CASE("structural cases of eval") {
    Environment env;
    ComplexMatrix g(3, 2);
    g(0, 0) = 1.0;
    g(2, 1) = cplx(0, 1);
    env.atoms.emplace("G", g);
    ComplexMatrix f(2, 3);
    f(1, 1) = 2.0;
    env.atoms.emplace("F", f);

    const Diagram dg = make_atom("G", sH, sK);
    const Diagram df = make_atom("F", sK, sH);

    CHECK(eval(make_id(sHK), env).matrix == ComplexMatrix::identity(5));
    CHECK(eval(dg, env).matrix == g);
    CHECK(diff(eval(make_seq(dg, df), env).matrix, matmul(f, g)) == 0.0);
    CHECK(diff(eval(make_tensor(dg, df), env).matrix, direct_sum(g, f)) == 0.0);
    CHECK(diff(eval(make_dagger(dg), env).matrix, adjoint(g)) == 0.0);

    // a permutation evaluates to the block wire permutation; swapping twice
    // restores the identity
    const Diagram sw = make_perm(Permutation{{2, 1}}, sHK);
    const Diagram back = make_perm(Permutation{{2, 1}}, Signature{{K3, H}});
    CHECK(eval(make_seq(sw, back), env).matrix == ComplexMatrix::identity(5));
    // the swap moves the H block below the K block
    const ComplexMatrix w = eval(sw, env).matrix;
    CHECK(w(3, 0) == cplx(1.0));
    CHECK(w(0, 2) == cplx(1.0));
}

TEST_CASE("closed-loop gain takes the value K/(1+K)") {
    const Diagram d = gain_diagram();
    for (double kval : {0.5, 2.0, -0.25}) {
        const Environment env = gain_env(kval, FeedbackMode::Relaxed);
        const OperatorValue v = eval(d, env);
        REQUIRE(v.matrix.rows() == 1);
        CHECK(std::abs(v.matrix(0, 0) - cplx(kval / (1.0 + kval))) < 1e-12);
    }
}

TEST_CASE("strict mode accepts kappa < 1 and rejects kappa >= 1") {
    const Diagram d = gain_diagram();
    EvalReport rep;
    const OperatorValue v = eval(d, gain_env(0.5, FeedbackMode::Strict), &rep);
    CHECK(std::abs(v.matrix(0, 0) - cplx(1.0 / 3.0)) < 1e-12);
    REQUIRE(rep.feedbacks.size() == 1);
    CHECK(rep.feedbacks[0].kappa == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(rep.feedbacks[0].strict_ok);
    CHECK(rep.feedbacks[0].neumann_terms > 0);

    try {
        eval(d, gain_env(2.0, FeedbackMode::Strict));
        FAIL("expected IllPosedFeedback");
    } catch (const IllPosedFeedback& e) {
        CHECK(e.kappa() == doctest::Approx(2.0).epsilon(1e-10));
    }
}

TEST_CASE("a singular loop is rejected even in relaxed mode") {
    CHECK_THROWS_AS(eval(gain_diagram(), gain_env(-1.0, FeedbackMode::Relaxed)), SingularLoop);
}

TEST_CASE("Neumann summation agrees with the direct solve") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        gen::Context cx(seed * 13 + 7);
        const Diagram d = gen::gen_diagram(cx);
        Environment env = random_environment(d, seed + 1000);
        const ComplexMatrix strict = eval(d, env).matrix;
        env.options.feedback_mode = FeedbackMode::Relaxed;
        const ComplexMatrix relaxed = eval(d, env).matrix;
        CAPTURE(seed);
        CHECK(diff(strict, relaxed) < 1e-10);
    }
}

TEST_CASE("feedback report carries a valid a-priori bound") {
    const Diagram d = gain_diagram();
    const auto [actual, bound] = eval_norm_bound(d, gain_env(0.5, FeedbackMode::Strict));
    // scalar case: actual = K^2/(1+K) = 1/6, bound = K^2/(1-K) = 1/2
    CHECK(actual == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
    CHECK(bound == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(actual <= bound + 1e-9);
}

TEST_CASE("the a-priori bound holds on random strict instances") {
    int loops_seen = 0;
    for (std::uint64_t seed = 0; seed < 40 || loops_seen < 10; ++seed) {
        REQUIRE(seed < 300);
        gen::Context cx(seed * 97 + 23);
        const Diagram d = gen::gen_diagram(cx);
        const Environment env = random_environment(d, seed + 5000);
        EvalReport rep;
        eval(d, env, &rep);
        for (const auto& f : rep.feedbacks) {
            ++loops_seen;
            CHECK(f.strict_ok);
            CHECK(f.loop_norm_actual <= f.loop_norm_bound + 1e-9);
            CHECK(f.truncation_bound >= 0.0);
        }
    }
}

TEST_CASE("unbound names raise dedicated errors") {
    Environment env;
    CHECK_THROWS_AS(eval(make_atom("Nope", sH, sH), env), UnboundAtom);
    CHECK_THROWS_AS(eval(make_ctrl(ctrl_token("u"), sH, sH), env), std::runtime_error);
}

TEST_CASE("environment shape mismatches are rejected") {
    Environment env;
    env.atoms.emplace("G", ComplexMatrix(2, 2));
    // G declared H(2) -> K(3) needs a 3x2 matrix
    CHECK_THROWS_AS(eval(make_atom("G", sH, sK), env), EnvError);
}

TEST_CASE("neutral control is the identity (SC7)") {
    Environment env;  // no monoid bound at all
    CHECK(eval(make_ctrl(ctrl_neutral(), sHK, sHK), env).matrix == ComplexMatrix::identity(5));
    CHECK(control_action(ctrl_neutral(), sHK, ctrl_env(3)).matrix ==
          ComplexMatrix::identity(5));
}

TEST_CASE("sequential controls compose through the star table (SC6)") {
    const Environment env = ctrl_env(4);
    const Diagram u1 = make_ctrl(ctrl_token("u"), sHK, sHK);
    const Diagram u2 = make_ctrl(ctrl_token("v"), sHK, sHK);
    const Diagram fused =
        make_ctrl(ctrl_star(ctrl_token("u"), ctrl_token("v")), sHK, sHK);
    CHECK(diff(eval(make_seq(u1, u2), env).matrix, eval(fused, env).matrix) < 1e-12);
    // u * v = neutral in Z/3, so the fused control is the identity
    CHECK(diff(eval(fused, env).matrix, ComplexMatrix::identity(5)) < 1e-9);
}

TEST_CASE("control distributes over tensor components (SC4)") {
    const Environment env = ctrl_env(5);
    const Diagram whole = make_ctrl(ctrl_token("u"), sHK, sHK);
    const Diagram split = make_tensor(make_ctrl(ctrl_token("u"), sH, sH),
                                      make_ctrl(ctrl_token("u"), sK, sK));
    CHECK(diff(eval(whole, env).matrix, eval(split, env).matrix) < 1e-12);
}

TEST_CASE("dagger of a control is the involuted control") {
    const Environment env = ctrl_env(6);
    const Diagram u = make_ctrl(ctrl_token("u"), sHK, sHK);
    CHECK(diff(eval(make_dagger(u), env).matrix,
               eval(make_ctrl(ctrl_involute(ctrl_token("u")), sHK, sHK), env).matrix) <
          1e-9);
}

TEST_CASE("dagger evaluates to the adjoint on feedback-free diagrams") {
    gen::Context cx(77, {.allow_feedback = false});
    for (int trial = 0; trial < 30; ++trial) {
        const Diagram d = gen::gen_diagram(cx);
        const Environment env = random_environment(d, 600 + static_cast<std::uint64_t>(trial));
        CHECK(diff(eval(make_dagger(d), env).matrix, adjoint(eval(d, env).matrix)) < 1e-9);
    }
}

TEST_CASE("rewritten diagrams evaluate identically") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        gen::Context cx(seed * 37 + 2);
        const Diagram d = gen::gen_diagram(cx);
        const Diagram r = gen::apply_random_rewrites(cx, d, 2);
        const Environment env = random_environment(make_tensor(d, r), seed + 9000);
        CAPTURE(seed);
        CHECK(diff(eval(d, env).matrix, eval(r, env).matrix) < 1e-9);
    }
}

TEST_CASE("eval is continuous in the environment") {
    const Diagram d = gain_diagram();
    const Environment base = gain_env(0.5, FeedbackMode::Strict);
    const ComplexMatrix v0 = eval(d, base).matrix;
    for (double delta : {1e-4, 1e-6, 1e-8}) {
        Environment pert = base;
        pert.atoms.at("K") = scalar(0.5 + delta);
        // d/dK [K/(1+K)] = 1/(1+K)^2 = 4/9 at K = 1/2
        const double change = std::abs(eval(d, pert).matrix(0, 0) - v0(0, 0));
        CHECK(change == doctest::Approx(delta * 4.0 / 9.0).epsilon(1e-2));
    }
}
