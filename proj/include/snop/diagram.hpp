#pragma once

#include <memory>
#include <string>
#include <vector>

#include "snop/matrix.hpp"

namespace snop {

struct TypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A named finite-dimensional model space.
struct SpaceRef {
    std::string name;
    int dim = 1;

    bool operator==(const SpaceRef&) const = default;
};

/// Ordered list of spaces; the empty list models the monoidal unit.
struct Signature {
    std::vector<SpaceRef> spaces;

    /// Product of dims (empty => 1), the tensor-product dimension.
    long long tensor_dim() const;
    /// Sum of dims (empty => 0), the dimension of the wire bundle carrying
    /// one vector per port; this is what operator matrices are sized by.
    int wire_dim() const;

    std::size_t size() const { return spaces.size(); }
    bool dims_match(const Signature& o) const;

    bool operator==(const Signature&) const = default;
};

/// 1-based permutation: map[k-1] = pi(k), a bijection on {1..n}.
struct Permutation {
    std::vector<int> map;

    bool valid() const;
    Permutation inverse() const;
    std::size_t size() const { return map.size(); }

    bool operator==(const Permutation&) const = default;
};

// ---------------------------------------------------------------------------
// Control expressions

enum class CtrlKind { Token, Neutral, Star, Involute };

struct ControlNode;
using ControlExpr = std::shared_ptr<const ControlNode>;

struct ControlNode {
    CtrlKind kind;
    std::string token;    // Token
    ControlExpr a, b;     // Star: a then b applied; Involute: a
};

ControlExpr ctrl_token(std::string name);
ControlExpr ctrl_neutral();
ControlExpr ctrl_star(ControlExpr first, ControlExpr second);
ControlExpr ctrl_involute(ControlExpr inner);
bool ctrl_equal(const ControlExpr& a, const ControlExpr& b);

/// A letter of a normalized control word.
struct CtrlLetter {
    std::string token;
    bool involuted = false;
    bool operator==(const CtrlLetter&) const = default;
};

/// Flatten to a free word: involutions pushed onto letters, neutrals dropped.
/// Letters are in application order (first applied first).
std::vector<CtrlLetter> ctrl_word(const ControlExpr& e);

/// Rebuild an expression from a word (empty word => Neutral).
ControlExpr ctrl_from_word(const std::vector<CtrlLetter>& word);

std::string ctrl_word_to_string(const std::vector<CtrlLetter>& word);

// ---------------------------------------------------------------------------
// Diagram terms

enum class DiagramKind { Id, Atom, Tensor, Seq, Perm, Feedback, Ctrl, Dagger };

struct DiagramNode;
using Diagram = std::shared_ptr<const DiagramNode>;

struct DiagramNode {
    DiagramKind kind;
    Signature sig;        // Id: interface; Atom/Ctrl: input signature
    Signature sig2;       // Atom/Ctrl: output signature
    std::string name;     // Atom
    bool daggered = false;  // Atom only: set by dagger_push
    Permutation perm;     // Perm (interface = sig)
    int fb_out = 0;       // Feedback: 1-based output port of inner
    int fb_in = 0;        // Feedback: 1-based input port of inner
    ControlExpr ctrl;     // Ctrl
    Diagram a, b;         // children
};

Diagram make_id(Signature sig);
Diagram make_atom(std::string name, Signature in_sig, Signature out_sig, bool daggered = false);
Diagram make_tensor(Diagram left, Diagram right);
Diagram make_seq(Diagram first, Diagram then);
Diagram make_perm(Permutation pi, Signature sig);
Diagram make_feedback(int out_port, int in_port, Diagram inner);
Diagram make_ctrl(ControlExpr u, Signature in_sig, Signature out_sig);
Diagram make_dagger(Diagram inner);

bool diagram_equal(const Diagram& x, const Diagram& y);

struct Interface {
    Signature in;
    Signature out;
};

/// Derive the external interface; throws TypeError on ill-formed terms.
Interface typecheck(const Diagram& d);

/// Push Dagger to the leaves: Seq reverses, Perm inverts, Feedback swaps its
/// port pair, Ctrl involutes, atoms get the daggered flag toggled.
Diagram dagger_push(const Diagram& d);

/// Dagger-free normal form: every Dagger node pushed onto atoms/controls.
Diagram remove_daggers(const Diagram& d);

/// Permute a signature: result[k] = sig[pi(k)].
Signature permute_signature(const Signature& sig, const Permutation& pi);

}  // namespace snop
