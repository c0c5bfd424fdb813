#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "snop/dsl.hpp"

#include "support/diagram_gen.hpp"

using namespace snop;

namespace {

const std::string kBasic =
    "# a comment\n"
    "space H dim 2;\n"
    "space K dim 3;\n"
    "atom G : H -> K;\n"
    "atom F : K -> H;\n"
    "control u involution v;\n"
    "control v involution u;\n"
    "diagram D = G then F;\n"
    "diagram E2 = ctrl[u * v^*](G then F) * id[H];\n";

}  // namespace

TEST_CASE("parse a representative program") {
    const SourceProgram p = parse(kBasic);
    REQUIRE(p.find_space("H") != nullptr);
    CHECK(p.find_space("H")->dim == 2);
    REQUIRE(p.find_atom("G") != nullptr);
    CHECK(p.find_atom("G")->in == Signature{{{"H", 2}}});
    CHECK(p.find_atom("G")->out == Signature{{{"K", 3}}});
    REQUIRE(p.find_control("u") != nullptr);
    CHECK(p.find_control("u")->involution == "v");
    REQUIRE(p.find_diagram("D") != nullptr);
    CHECK(p.find_diagram("D")->term->kind == DiagramKind::Seq);
    REQUIRE(p.find_diagram("E2") != nullptr);
    CHECK(p.find_diagram("E2")->term->kind == DiagramKind::Tensor);
}

TEST_CASE("operator precedence: then binds looser than *") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "atom A : H -> H;\n"
        "atom B : (H,H) -> (H,H);\n"
        "diagram D = A * A then B;\n");
    const Diagram d = p.find_diagram("D")->term;
    REQUIRE(d->kind == DiagramKind::Seq);
    CHECK(d->a->kind == DiagramKind::Tensor);
    CHECK(d->b->kind == DiagramKind::Atom);
}

TEST_CASE("then and * are left-associative") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "atom A : H -> H;\n"
        "diagram D = A then A then A;\n"
        "diagram T = A * A * A;\n");
    const Diagram d = p.find_diagram("D")->term;
    REQUIRE(d->kind == DiagramKind::Seq);
    CHECK(d->a->kind == DiagramKind::Seq);
    const Diagram t = p.find_diagram("T")->term;
    REQUIRE(t->kind == DiagramKind::Tensor);
    CHECK(t->a->kind == DiagramKind::Tensor);
}

TEST_CASE("perm and ctrl over id desugar to bare generators") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "space K dim 3;\n"
        "control u;\n"
        "diagram P = perm[2,1](id[H,K]);\n"
        "diagram C = ctrl[u](id[H]);\n");
    CHECK(p.find_diagram("P")->term->kind == DiagramKind::Perm);
    CHECK(p.find_diagram("C")->term->kind == DiagramKind::Ctrl);
}

TEST_CASE("perm over a non-identity becomes a sequential stage") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "atom A : H -> (H,H);\n"
        "diagram D = perm[2,1](A);\n");
    const Diagram d = p.find_diagram("D")->term;
    REQUIRE(d->kind == DiagramKind::Seq);
    CHECK(d->a->kind == DiagramKind::Atom);
    CHECK(d->b->kind == DiagramKind::Perm);
}

TEST_CASE("dagger and feedback parse") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "atom A : (H,H) -> (H,H);\n"
        "diagram D = feedback[1,2](dagger(A));\n");
    const Diagram d = p.find_diagram("D")->term;
    REQUIRE(d->kind == DiagramKind::Feedback);
    CHECK(d->fb_out == 1);
    CHECK(d->fb_in == 2);
    CHECK(d->a->kind == DiagramKind::Dagger);
}

TEST_CASE("diagram names inline previously declared terms") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "atom A : H -> H;\n"
        "diagram D = A then A;\n"
        "diagram E2 = D then A;\n");
    const Diagram e = p.find_diagram("E2")->term;
    REQUIRE(e->kind == DiagramKind::Seq);
    CHECK(e->a->kind == DiagramKind::Seq);  // D's body, inlined
}

TEST_CASE("parse errors carry 1-based positions") {
    try {
        parse("space H dim 2;\nspace K dim;\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.col() >= 11);
    }
    CHECK_THROWS_AS(parse("diagram D = ;"), ParseError);
    CHECK_THROWS_AS(parse("space H dim 2"), ParseError);        // missing ';'
    CHECK_THROWS_AS(parse("space H dim 2;\natom A : H -> ;\n"), ParseError);
    CHECK_THROWS_AS(parse("space H dim 2;\ndiagram D = id[H] then;\n"), ParseError);
    CHECK_THROWS_AS(parse("space H dim 0;\n"), ParseError);     // dims are positive
}

TEST_CASE("name resolution errors") {
    CHECK_THROWS_AS(parse("diagram D = id[H];"), ParseError);                 // unknown space
    CHECK_THROWS_AS(parse("space H dim 2;\ndiagram D = G;\n"), ParseError);   // unknown atom
    CHECK_THROWS_AS(parse("space H dim 2;\ndiagram D = ctrl[u](id[H]);\n"),
                    ParseError);                                              // unknown token
    CHECK_THROWS_AS(parse("space H dim 2;\nspace H dim 3;\n"), ParseError);   // duplicate
    CHECK_THROWS_AS(parse("control e;\n"), ParseError);                       // reserved
}

TEST_CASE("ill-typed bodies are rejected at the definition") {
    const std::string prelude = "space H dim 2;\nspace K dim 3;\natom G : H -> K;\n";
    CHECK_THROWS_AS(parse(prelude + "diagram D = G then G;\n"), TypeError);
    CHECK_THROWS_AS(parse(prelude + "diagram D = feedback[1,1](G * G);\n"), TypeError);
    CHECK_THROWS_AS(parse(prelude + "diagram D = perm[1,1](id[H,K]);\n"), ParseError);
}

TEST_CASE("print/parse round-trip on handwritten programs") {
    const SourceProgram p = parse(kBasic);
    const SourceProgram q = parse(print(p));
    CHECK(program_equal(p, q));
    CHECK(print(p) == print(q));  // printing is idempotent
}

TEST_CASE("empty signatures print and reparse") {
    const SourceProgram p = parse(
        "space H dim 2;\n"
        "atom S : () -> H;\n"
        "diagram D = S then id[H];\n");
    CHECK(program_equal(p, parse(print(p))));
}

TEST_CASE("round-trip property on 500 generated programs") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        gen::Context cx(seed * 7919 + 1);
        const Diagram d = gen::gen_diagram(cx);
        const SourceProgram p = gen::to_program(cx, d, "D");
        std::string text;
        REQUIRE_NOTHROW(text = print(p));
        SourceProgram q;
        CAPTURE(text);
        REQUIRE_NOTHROW(q = parse(text));
        CHECK(program_equal(p, q));
    }
}
