#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "snop/diagram.hpp"

namespace snop {

/// Positioned syntax error; line/column are 1-based into the source text.
class ParseError : public std::runtime_error {
  public:
    ParseError(int line, int col, std::string message, std::string expected)
        : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                             std::to_string(col) + ": " + message +
                             (expected.empty() ? "" : " (expected " + expected + ")")),
          line_(line), col_(col), message_(std::move(message)), expected_(std::move(expected)) {}

    int line() const { return line_; }
    int col() const { return col_; }
    const std::string& message() const { return message_; }
    const std::string& expected() const { return expected_; }

  private:
    int line_, col_;
    std::string message_, expected_;
};

struct SpaceDecl {
    std::string name;
    int dim = 1;
};

struct AtomDecl {
    std::string name;
    Signature in;
    Signature out;
};

struct ControlDecl {
    std::string name;
    std::string involution;  // empty when none declared
};

struct DiagramDecl {
    std::string name;
    Diagram term;
};

using Decl = std::variant<SpaceDecl, AtomDecl, ControlDecl, DiagramDecl>;

/// A parsed .snop file: declarations in source order; every diagram term
/// has already been typechecked against the declarations above it.
struct SourceProgram {
    std::vector<Decl> decls;

    const SpaceDecl* find_space(const std::string& name) const;
    const AtomDecl* find_atom(const std::string& name) const;
    const ControlDecl* find_control(const std::string& name) const;
    const DiagramDecl* find_diagram(const std::string& name) const;
};

/// Structural equality: same declarations in the same order, diagram bodies
/// compared with diagram_equal.
bool program_equal(const SourceProgram& a, const SourceProgram& b);

SourceProgram parse(const std::string& text);

/// Canonical text rendering; parse(print(p)) is structurally equal to p.
std::string print(const SourceProgram& p);

/// Render a single diagram term as an expression string (the body syntax).
std::string print_expr(const Diagram& d);

}  // namespace snop
