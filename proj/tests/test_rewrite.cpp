#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "snop/rewrite.hpp"

#include "support/diagram_gen.hpp"

using namespace snop;

namespace {

const SpaceRef H{"H", 2};
const SpaceRef K{"K", 3};
const Signature sH{{H}};
const Signature sK{{K}};
const Signature sHK{{H, K}};
const Signature sHH{{H, H}};

Diagram ctrl1(const char* tok, const Signature& s) { return make_ctrl(ctrl_token(tok), s, s); }

}  // namespace

TEST_CASE("equiv is reflexive and reports a trace") {
    gen::Context cx(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Diagram d = gen::gen_diagram(cx);
        const EquivVerdict v = equiv(d, d);
        CHECK(v.verdict == Verdict::Equal);
        CHECK(!v.trace.empty());
    }
}

TEST_CASE("monoidal unit and associativity laws") {
    const Diagram g = make_atom("G", sH, sK);
    const Interface i = typecheck(g);
    CHECK(equiv(make_seq(make_id(i.in), g), g).verdict == Verdict::Equal);
    CHECK(equiv(make_seq(g, make_id(i.out)), g).verdict == Verdict::Equal);

    const Diagram a = make_atom("A", sH, sH);
    const Diagram b = make_atom("B", sK, sK);
    CHECK(equiv(make_tensor(make_tensor(a, b), g), make_tensor(a, make_tensor(b, g))).verdict ==
          Verdict::Equal);
}

TEST_CASE("yanking: swap then swap is the identity") {
    const Diagram sw = make_perm(Permutation{{2, 1}}, sHK);
    const Diagram back = make_perm(Permutation{{2, 1}}, Signature{{K, H}});
    CHECK(equiv(make_seq(sw, back), make_id(sHK)).verdict == Verdict::Equal);
}

TEST_CASE("control fusion: sequential controls concatenate") {
    const Diagram fused =
        make_ctrl(ctrl_star(ctrl_token("u"), ctrl_token("v")), sH, sH);
    const Diagram split = make_seq(ctrl1("u", sH), ctrl1("v", sH));
    CHECK(equiv(split, fused).verdict == Verdict::Equal);
    // fusion also happens across an intervening identity wire
    const Diagram split_id =
        make_seq(ctrl1("u", sH), make_seq(make_id(sH), ctrl1("v", sH)));
    CHECK(equiv(split_id, fused).verdict == Verdict::Equal);
    // order matters for free words
    const Diagram swapped = make_seq(ctrl1("v", sH), ctrl1("u", sH));
    CHECK(equiv(split, swapped).verdict == Verdict::Inequivalent);
}

TEST_CASE("neutral controls erase") {
    const Diagram g = make_atom("G", sH, sK);
    const Diagram with_neutral = make_seq(g, make_ctrl(ctrl_neutral(), sK, sK));
    CHECK(equiv(with_neutral, g).verdict == Verdict::Equal);
    // u * u^* is NOT neutral for a free word
    const Diagram uustar =
        make_ctrl(ctrl_star(ctrl_token("u"), ctrl_involute(ctrl_token("u"))), sH, sH);
    CHECK(equiv(make_seq(g, make_ctrl(uustar->ctrl, sK, sK)), g).verdict ==
          Verdict::Inequivalent);
}

TEST_CASE("control distributes over tensor components") {
    const Diagram whole = ctrl1("u", sHK);
    const Diagram split = make_tensor(ctrl1("u", sH), ctrl1("u", sK));
    CHECK(equiv(whole, split).verdict == Verdict::Equal);
    // different words on the components do not merge
    const Diagram mixed = make_tensor(ctrl1("u", sH), ctrl1("v", sK));
    CHECK(equiv(whole, mixed).verdict == Verdict::Inequivalent);
}

TEST_CASE("control-permutation naturality") {
    const Permutation swap{{2, 1}};
    const Diagram lhs = make_seq(ctrl1("u", sHK), make_perm(swap, sHK));
    const Diagram rhs =
        make_seq(make_perm(swap, sHK), ctrl1("u", Signature{{K, H}}));
    CHECK(equiv(lhs, rhs).verdict == Verdict::Equal);
}

TEST_CASE("signature mismatch is a hard error, not a verdict") {
    const Diagram g = make_atom("G", sH, sH);
    const Diagram k = make_atom("K", sK, sK);
    CHECK_THROWS_AS(equiv(make_tensor(g, k), make_tensor(k, g)), SignatureMismatch);
}

TEST_CASE("same interface, different graphs: Inequivalent with witness") {
    const Diagram a = make_atom("A", sH, sH);
    const Diagram b = make_atom("B", sH, sH);
    const EquivVerdict v = equiv(make_seq(a, b), make_seq(b, a));
    CHECK(v.verdict == Verdict::Inequivalent);
    CHECK(!v.witness.empty());
}

TEST_CASE("a control node on its own fed wire yields Unknown") {
    // inner: ctrl[u] on (H,H), then swap; feeding out 1 into in 2 routes the
    // second control component's output back into its own input.
    const Diagram inner =
        make_seq(ctrl1("u", sHH), make_perm(Permutation{{2, 1}}, sHH));
    const Diagram d = make_feedback(1, 2, inner);
    const EquivVerdict v = equiv(d, make_id(sH));
    CHECK(v.verdict == Verdict::Unknown);
    CHECK(!v.reason.empty());
}

TEST_CASE("monoid resolution collapses words") {
    Rng rng(7);
    // Z/3 on tokens u, v: u * v = neutral, u^* = v.
    const ControlMonoid cm = random_cyclic_monoid(rng, {"u", "v"}, {{"H", 2}});
    const Diagram uv = make_seq(ctrl1("u", sH), ctrl1("v", sH));
    CHECK(equiv(uv, make_id(sH)).verdict == Verdict::Inequivalent);  // free word
    CHECK(equiv(uv, make_id(sH), &cm).verdict == Verdict::Equal);    // resolved
    const Diagram ustar = make_ctrl(ctrl_involute(ctrl_token("u")), sH, sH);
    CHECK(equiv(ustar, ctrl1("v", sH), &cm).verdict == Verdict::Equal);
}

TEST_CASE("canonicalize is idempotent") {
    gen::Context cx(2);
    for (int trial = 0; trial < 30; ++trial) {
        const Diagram d = gen::gen_diagram(cx);
        const CanonicalForm c1 = canonicalize(d);
        const CanonicalForm c2 = canonicalize(normalize_control(d));
        CHECK(c1.serial == c2.serial);
    }
}

TEST_CASE("random rewrites preserve the canonical form") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        gen::Context cx(seed * 31 + 5);
        const Diagram d = gen::gen_diagram(cx);
        const Diagram r = gen::apply_random_rewrites(cx, d, 3);
        const EquivVerdict v = equiv(d, r);
        CAPTURE(seed);
        CHECK(v.verdict == Verdict::Equal);
    }
}

TEST_CASE("equiv is symmetric and transitive on rewrite chains") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        gen::Context cx(seed * 101 + 3);
        const Diagram d0 = gen::gen_diagram(cx);
        const Diagram d1 = gen::apply_random_rewrite(cx, d0);
        const Diagram d2 = gen::apply_random_rewrite(cx, d1);
        CHECK(equiv(d0, d1).verdict == Verdict::Equal);
        CHECK(equiv(d1, d0).verdict == Verdict::Equal);
        CHECK(equiv(d0, d2).verdict == Verdict::Equal);
    }
}

TEST_CASE("dagger compatibility: rewrites commute with dagger") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        gen::Context cx(seed * 17 + 11);
        const Diagram d = gen::gen_diagram(cx);
        const Diagram r = gen::apply_random_rewrite(cx, d);
        CHECK(equiv(dagger_push(d), dagger_push(r)).verdict == Verdict::Equal);
    }
}
