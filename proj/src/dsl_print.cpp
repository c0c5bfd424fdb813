#include <sstream>

#include "snop/dsl.hpp"

namespace snop {

namespace {

std::string siglist(const Signature& sig) {
    if (sig.spaces.empty()) return "()";
    std::string s;
    for (std::size_t i = 0; i < sig.spaces.size(); ++i) {
        if (i) s += ",";
        s += sig.spaces[i].name;
    }
    return s;
}

std::string ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

// Precedence levels: 0 = sequential ("then"), 1 = tensor ("*"), 2 = primary.
struct Rendered {
    std::string text;
    int level = 2;
};

Rendered render(const Diagram& d);

std::string wrap(const Diagram& d, int min_level) {
    Rendered r = render(d);
    if (r.level < min_level) return "(" + r.text + ")";
    return r.text;
}

std::string ctrl_brackets(const ControlExpr& u) {
    return ctrl_word_to_string(ctrl_word(u));
}

Rendered render(const Diagram& d) {
    switch (d->kind) {
        case DiagramKind::Id:
            return {"id[" + siglist(d->sig) + "]", 2};
        case DiagramKind::Atom:
            if (d->daggered)
                return {"dagger(" + d->name + ")", 2};
            return {d->name, 2};
        case DiagramKind::Tensor:
            return {wrap(d->a, 1) + " * " + wrap(d->b, 2), 1};
        case DiagramKind::Seq: {
            // Postfix generators parse as sugar: perm[pi](X) / ctrl[u](X) mean
            // "X then the generator"; reuse that form when it is faithful.
            const Diagram& b = d->b;
            // (sugar over an Id argument would reparse as the bare generator,
            // so it is only used when the first stage is not an Id)
            const bool sugar_ok = d->a->kind != DiagramKind::Id;
            if (sugar_ok && b->kind == DiagramKind::Perm && typecheck(d->a).out == b->sig)
                return {"perm[" + ints(b->perm.map) + "](" + render(d->a).text + ")", 2};
            if (sugar_ok && b->kind == DiagramKind::Ctrl && b->sig == b->sig2 &&
                typecheck(d->a).out == b->sig)
                return {"ctrl[" + ctrl_brackets(b->ctrl) + "](" + render(d->a).text + ")", 2};
            return {wrap(d->a, 0) + " then " + wrap(d->b, 1), 0};
        }
        case DiagramKind::Perm:
            return {"perm[" + ints(d->perm.map) + "](id[" + siglist(d->sig) + "])", 2};
        case DiagramKind::Feedback:
            return {"feedback[" + std::to_string(d->fb_out) + "," + std::to_string(d->fb_in) +
                        "](" + render(d->a).text + ")",
                    2};
        case DiagramKind::Ctrl:
            if (!(d->sig == d->sig2))
                throw std::runtime_error("cannot print rectangular control generator");
            return {"ctrl[" + ctrl_brackets(d->ctrl) + "](id[" + siglist(d->sig) + "])", 2};
        case DiagramKind::Dagger:
            return {"dagger(" + render(d->a).text + ")", 2};
    }
    throw std::runtime_error("unreachable");
}

}  // namespace

std::string print_expr(const Diagram& d) { return render(d).text; }

std::string print(const SourceProgram& p) {
    std::ostringstream os;
    for (const Decl& d : p.decls) {
        if (const auto* s = std::get_if<SpaceDecl>(&d)) {
            os << "space " << s->name << " dim " << s->dim << ";\n";
        } else if (const auto* a = std::get_if<AtomDecl>(&d)) {
            os << "atom " << a->name << " : " << siglist(a->in) << " -> " << siglist(a->out)
               << ";\n";
        } else if (const auto* c = std::get_if<ControlDecl>(&d)) {
            os << "control " << c->name;
            if (!c->involution.empty()) os << " involution " << c->involution;
            os << ";\n";
        } else if (const auto* g = std::get_if<DiagramDecl>(&d)) {
            os << "diagram " << g->name << " = " << print_expr(g->term) << ";\n";
        }
    }
    return os.str();
}

}  // namespace snop
