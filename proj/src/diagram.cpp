#include "snop/diagram.hpp"

#include <algorithm>

namespace snop {

long long Signature::tensor_dim() const {
    long long p = 1;
    for (const auto& s : spaces) p *= s.dim;
    return p;
}

int Signature::wire_dim() const {
    int s = 0;
    for (const auto& sp : spaces) s += sp.dim;
    return s;
}

bool Signature::dims_match(const Signature& o) const {
    if (spaces.size() != o.spaces.size()) return false;
    for (std::size_t i = 0; i < spaces.size(); ++i)
        if (spaces[i].dim != o.spaces[i].dim) return false;
    return true;
}

bool Permutation::valid() const {
    const int n = static_cast<int>(map.size());
    std::vector<bool> seen(map.size(), false);
    for (int v : map) {
        if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)]) return false;
        seen[static_cast<std::size_t>(v - 1)] = true;
    }
    return true;
}

Permutation Permutation::inverse() const {
    Permutation inv;
    inv.map.resize(map.size());
    for (std::size_t k = 0; k < map.size(); ++k)
        inv.map[static_cast<std::size_t>(map[k] - 1)] = static_cast<int>(k + 1);
    return inv;
}

Signature permute_signature(const Signature& sig, const Permutation& pi) {
    Signature out;
    out.spaces.resize(sig.spaces.size());
    for (std::size_t k = 0; k < sig.spaces.size(); ++k)
        out.spaces[k] = sig.spaces[static_cast<std::size_t>(pi.map[k] - 1)];
    return out;
}

// ---------------------------------------------------------------------------
// Control expressions

ControlExpr ctrl_token(std::string name) {
    auto n = std::make_shared<ControlNode>();
    n->kind = CtrlKind::Token;
    n->token = std::move(name);
    return n;
}

ControlExpr ctrl_neutral() {
    auto n = std::make_shared<ControlNode>();
    n->kind = CtrlKind::Neutral;
    return n;
}

ControlExpr ctrl_star(ControlExpr first, ControlExpr second) {
    auto n = std::make_shared<ControlNode>();
    n->kind = CtrlKind::Star;
    n->a = std::move(first);
    n->b = std::move(second);
    return n;
}

ControlExpr ctrl_involute(ControlExpr inner) {
    auto n = std::make_shared<ControlNode>();
    n->kind = CtrlKind::Involute;
    n->a = std::move(inner);
    return n;
}

bool ctrl_equal(const ControlExpr& a, const ControlExpr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case CtrlKind::Token: return a->token == b->token;
        case CtrlKind::Neutral: return true;
        case CtrlKind::Star: return ctrl_equal(a->a, b->a) && ctrl_equal(a->b, b->b);
        case CtrlKind::Involute: return ctrl_equal(a->a, b->a);
    }
    return false;
}

namespace {
void word_rec(const ControlExpr& e, bool inv, std::vector<CtrlLetter>& out) {
    switch (e->kind) {
        case CtrlKind::Neutral:
            return;
        case CtrlKind::Token:
            out.push_back({e->token, inv});
            return;
        case CtrlKind::Involute:
            word_rec(e->a, !inv, out);
            return;
        case CtrlKind::Star:
            // (u1 * u2)^* = u2^* * u1^*
            if (inv) {
                word_rec(e->b, true, out);
                word_rec(e->a, true, out);
            } else {
                word_rec(e->a, false, out);
                word_rec(e->b, false, out);
            }
            return;
    }
}
}  // namespace

std::vector<CtrlLetter> ctrl_word(const ControlExpr& e) {
    std::vector<CtrlLetter> out;
    word_rec(e, false, out);
    return out;
}

ControlExpr ctrl_from_word(const std::vector<CtrlLetter>& word) {
    if (word.empty()) return ctrl_neutral();
    ControlExpr e;
    for (const auto& l : word) {
        ControlExpr t = ctrl_token(l.token);
        if (l.involuted) t = ctrl_involute(t);
        e = e ? ctrl_star(e, t) : t;
    }
    return e;
}

std::string ctrl_word_to_string(const std::vector<CtrlLetter>& word) {
    if (word.empty()) return "e";
    std::string s;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i) s += " * ";
        s += word[i].token;
        if (word[i].involuted) s += "^*";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Diagram construction

Diagram make_id(Signature sig) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Id;
    n->sig = std::move(sig);
    return n;
}

Diagram make_atom(std::string name, Signature in_sig, Signature out_sig, bool daggered) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Atom;
    n->name = std::move(name);
    n->sig = std::move(in_sig);
    n->sig2 = std::move(out_sig);
    n->daggered = daggered;
    return n;
}

Diagram make_tensor(Diagram left, Diagram right) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Tensor;
    n->a = std::move(left);
    n->b = std::move(right);
    return n;
}

Diagram make_seq(Diagram first, Diagram then) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Seq;
    n->a = std::move(first);
    n->b = std::move(then);
    return n;
}

Diagram make_perm(Permutation pi, Signature sig) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Perm;
    n->perm = std::move(pi);
    n->sig = std::move(sig);
    return n;
}

Diagram make_feedback(int out_port, int in_port, Diagram inner) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Feedback;
    n->fb_out = out_port;
    n->fb_in = in_port;
    n->a = std::move(inner);
    return n;
}

Diagram make_ctrl(ControlExpr u, Signature in_sig, Signature out_sig) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Ctrl;
    n->ctrl = std::move(u);
    n->sig = std::move(in_sig);
    n->sig2 = std::move(out_sig);
    return n;
}

Diagram make_dagger(Diagram inner) {
    auto n = std::make_shared<DiagramNode>();
    n->kind = DiagramKind::Dagger;
    n->a = std::move(inner);
    return n;
}

bool diagram_equal(const Diagram& x, const Diagram& y) {
    if (x == y) return true;
    if (!x || !y || x->kind != y->kind) return false;
    switch (x->kind) {
        case DiagramKind::Id:
            return x->sig == y->sig;
        case DiagramKind::Atom:
            return x->name == y->name && x->daggered == y->daggered &&
                   x->sig == y->sig && x->sig2 == y->sig2;
        case DiagramKind::Tensor:
        case DiagramKind::Seq:
            return diagram_equal(x->a, y->a) && diagram_equal(x->b, y->b);
        case DiagramKind::Perm:
            return x->perm == y->perm && x->sig == y->sig;
        case DiagramKind::Feedback:
            return x->fb_out == y->fb_out && x->fb_in == y->fb_in &&
                   diagram_equal(x->a, y->a);
        case DiagramKind::Ctrl:
            // Control expressions compare by normalized word, so that e.g.
            // (u^*)^* and u denote the same control.
            return ctrl_word(x->ctrl) == ctrl_word(y->ctrl) && x->sig == y->sig &&
                   x->sig2 == y->sig2;
        case DiagramKind::Dagger:
            return diagram_equal(x->a, y->a);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Typechecking

Interface typecheck(const Diagram& d) {
    if (!d) throw TypeError("null diagram");
    switch (d->kind) {
        case DiagramKind::Id:
            return {d->sig, d->sig};
        case DiagramKind::Atom:
            return {d->sig, d->sig2};
        case DiagramKind::Tensor: {
            Interface l = typecheck(d->a);
            Interface r = typecheck(d->b);
            Interface out = l;
            out.in.spaces.insert(out.in.spaces.end(), r.in.spaces.begin(), r.in.spaces.end());
            out.out.spaces.insert(out.out.spaces.end(), r.out.spaces.begin(), r.out.spaces.end());
            return out;
        }
        case DiagramKind::Seq: {
            Interface f = typecheck(d->a);
            Interface g = typecheck(d->b);
            if (!f.out.dims_match(g.in))
                throw TypeError("sequential composition: interface mismatch between stages");
            return {f.in, g.out};
        }
        case DiagramKind::Perm: {
            if (d->perm.size() != d->sig.size() || !d->perm.valid())
                throw TypeError("invalid permutation for signature");
            return {d->sig, permute_signature(d->sig, d->perm)};
        }
        case DiagramKind::Feedback: {
            Interface inner = typecheck(d->a);
            const int i = d->fb_out, j = d->fb_in;
            if (i == j) throw TypeError("feedback: port indices must differ (i = j)");
            if (i < 1 || static_cast<std::size_t>(i) > inner.out.size())
                throw TypeError("feedback: output port index out of range");
            if (j < 1 || static_cast<std::size_t>(j) > inner.in.size())
                throw TypeError("feedback: input port index out of range");
            const SpaceRef& oi = inner.out.spaces[static_cast<std::size_t>(i - 1)];
            const SpaceRef& ij = inner.in.spaces[static_cast<std::size_t>(j - 1)];
            if (oi.dim != ij.dim)
                throw TypeError("feedback: fed port dimensions differ");
            Interface out;
            for (std::size_t k = 0; k < inner.in.size(); ++k)
                if (k != static_cast<std::size_t>(j - 1)) out.in.spaces.push_back(inner.in.spaces[k]);
            for (std::size_t k = 0; k < inner.out.size(); ++k)
                if (k != static_cast<std::size_t>(i - 1)) out.out.spaces.push_back(inner.out.spaces[k]);
            return out;
        }
        case DiagramKind::Ctrl: {
            if (d->sig.size() != d->sig2.size())
                throw TypeError("ctrl: input/output component counts differ");
            return {d->sig, d->sig2};
        }
        case DiagramKind::Dagger: {
            Interface inner = typecheck(d->a);
            return {inner.out, inner.in};
        }
    }
    throw TypeError("unreachable");
}

/// Remove Dagger constructors by pushing them to the leaves.
Diagram remove_daggers(const Diagram& d) {
    switch (d->kind) {
        case DiagramKind::Id:
        case DiagramKind::Atom:
        case DiagramKind::Perm:
        case DiagramKind::Ctrl:
            return d;
        case DiagramKind::Tensor:
            return make_tensor(remove_daggers(d->a), remove_daggers(d->b));
        case DiagramKind::Seq:
            return make_seq(remove_daggers(d->a), remove_daggers(d->b));
        case DiagramKind::Feedback:
            return make_feedback(d->fb_out, d->fb_in, remove_daggers(d->a));
        case DiagramKind::Dagger:
            return dagger_push(d->a);
    }
    throw TypeError("unreachable");
}

Diagram dagger_push(const Diagram& d) {
    switch (d->kind) {
        case DiagramKind::Id:
            return d;
        case DiagramKind::Atom:
            return make_atom(d->name, d->sig2, d->sig, !d->daggered);
        case DiagramKind::Tensor:
            return make_tensor(dagger_push(d->a), dagger_push(d->b));
        case DiagramKind::Seq:
            return make_seq(dagger_push(d->b), dagger_push(d->a));
        case DiagramKind::Perm:
            return make_perm(d->perm.inverse(), permute_signature(d->sig, d->perm));
        case DiagramKind::Feedback:
            return make_feedback(d->fb_in, d->fb_out, dagger_push(d->a));
        case DiagramKind::Ctrl:
            return make_ctrl(ctrl_involute(d->ctrl), d->sig2, d->sig);
        case DiagramKind::Dagger:
            // double dagger cancels
            return remove_daggers(d->a);
    }
    throw TypeError("unreachable");
}

}  // namespace snop
