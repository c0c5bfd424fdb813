#include <cctype>
#include <map>
#include <set>

#include "snop/dsl.hpp"

namespace snop {

const SpaceDecl* SourceProgram::find_space(const std::string& name) const {
    for (const auto& d : decls)
        if (const auto* s = std::get_if<SpaceDecl>(&d); s && s->name == name) return s;
    return nullptr;
}
const AtomDecl* SourceProgram::find_atom(const std::string& name) const {
    for (const auto& d : decls)
        if (const auto* a = std::get_if<AtomDecl>(&d); a && a->name == name) return a;
    return nullptr;
}
const ControlDecl* SourceProgram::find_control(const std::string& name) const {
    for (const auto& d : decls)
        if (const auto* c = std::get_if<ControlDecl>(&d); c && c->name == name) return c;
    return nullptr;
}
const DiagramDecl* SourceProgram::find_diagram(const std::string& name) const {
    for (const auto& d : decls)
        if (const auto* g = std::get_if<DiagramDecl>(&d); g && g->name == name) return g;
    return nullptr;
}

bool program_equal(const SourceProgram& a, const SourceProgram& b) {
    if (a.decls.size() != b.decls.size()) return false;
    for (std::size_t i = 0; i < a.decls.size(); ++i) {
        const Decl& x = a.decls[i];
        const Decl& y = b.decls[i];
        if (x.index() != y.index()) return false;
        if (const auto* s = std::get_if<SpaceDecl>(&x)) {
            const auto* t = std::get_if<SpaceDecl>(&y);
            if (s->name != t->name || s->dim != t->dim) return false;
        } else if (const auto* s2 = std::get_if<AtomDecl>(&x)) {
            const auto* t = std::get_if<AtomDecl>(&y);
            if (s2->name != t->name || !(s2->in == t->in) || !(s2->out == t->out)) return false;
        } else if (const auto* s3 = std::get_if<ControlDecl>(&x)) {
            const auto* t = std::get_if<ControlDecl>(&y);
            if (s3->name != t->name || s3->involution != t->involution) return false;
        } else {
            const auto* s4 = std::get_if<DiagramDecl>(&x);
            const auto* t = std::get_if<DiagramDecl>(&y);
            if (s4->name != t->name || !diagram_equal(s4->term, t->term)) return false;
        }
    }
    return true;
}

namespace {

enum class Tok {
    Ident, Int, Semi, Colon, Comma, Star, LParen, RParen,
    LBrack, RBrack, Arrow, CaretStar, Equals, End
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    long value = 0;
    int line = 1, col = 1;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_ws_and_comments();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size()) {
                t.kind = Tok::End;
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                t.kind = Tok::Ident;
                t.text = src_.substr(start, pos_ - start);
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t start = pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    advance();
                t.kind = Tok::Int;
                t.text = src_.substr(start, pos_ - start);
                t.value = std::stol(t.text);
            } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
                advance();
                advance();
                t.kind = Tok::Arrow;
            } else if (c == '^' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
                advance();
                advance();
                t.kind = Tok::CaretStar;
            } else {
                switch (c) {
                    case ';': t.kind = Tok::Semi; break;
                    case ':': t.kind = Tok::Colon; break;
                    case ',': t.kind = Tok::Comma; break;
                    case '*': t.kind = Tok::Star; break;
                    case '(': t.kind = Tok::LParen; break;
                    case ')': t.kind = Tok::RParen; break;
                    case '[': t.kind = Tok::LBrack; break;
                    case ']': t.kind = Tok::RBrack; break;
                    case '=': t.kind = Tok::Equals; break;
                    default:
                        throw ParseError(line_, col_,
                                         std::string("unexpected character '") + c + "'", "");
                }
                advance();
            }
            out.push_back(std::move(t));
        }
    }

  private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws_and_comments() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
                advance();
            if (pos_ < src_.size() && src_[pos_] == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
                continue;
            }
            return;
        }
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

class Parser {
  public:
    explicit Parser(const std::string& text) : toks_(Lexer(text).run()) {}

    SourceProgram run() {
        SourceProgram p;
        while (!at(Tok::End)) {
            parse_decl(p);
            expect(Tok::Semi, "';'");
        }
        return p;
    }

  private:
    const Token& cur() const { return toks_[idx_]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_kw(const char* kw) const { return at(Tok::Ident) && cur().text == kw; }
    Token take() { return toks_[idx_++]; }

    [[noreturn]] void fail(const std::string& msg, const std::string& expected) const {
        throw ParseError(cur().line, cur().col, msg, expected);
    }

    Token expect(Tok k, const char* what) {
        if (!at(k)) fail("unexpected token" + describe_cur(), what);
        return take();
    }

    std::string describe_cur() const {
        if (at(Tok::End)) return " (end of input)";
        if (at(Tok::Ident) || at(Tok::Int)) return " '" + cur().text + "'";
        return "";
    }

    std::string expect_ident(const char* what) { return expect(Tok::Ident, what).text; }

    void check_fresh(const std::string& name) {
        if (names_.count(name)) fail("duplicate name '" + name + "'", "a fresh identifier");
        names_.insert(name);
    }

    void parse_decl(SourceProgram& p) {
        if (at_kw("space")) {
            take();
            SpaceDecl d;
            d.name = expect_ident("space name");
            check_fresh(d.name);
            if (!at_kw("dim")) fail("missing 'dim'", "'dim'");
            take();
            Token n = expect(Tok::Int, "dimension");
            if (n.value < 1) throw ParseError(n.line, n.col, "space dimension must be >= 1", "");
            d.dim = static_cast<int>(n.value);
            spaces_[d.name] = d.dim;
            p.decls.emplace_back(std::move(d));
        } else if (at_kw("atom")) {
            take();
            AtomDecl d;
            d.name = expect_ident("atom name");
            check_fresh(d.name);
            expect(Tok::Colon, "':'");
            d.in = parse_siglist();
            expect(Tok::Arrow, "'->'");
            d.out = parse_siglist();
            atoms_[d.name] = d;
            p.decls.emplace_back(std::move(d));
        } else if (at_kw("control")) {
            take();
            ControlDecl d;
            d.name = expect_ident("control token name");
            if (d.name == "e") fail("'e' is reserved for the neutral control", "a fresh identifier");
            check_fresh(d.name);
            controls_.insert(d.name);
            if (at_kw("involution")) {
                take();
                d.involution = expect_ident("involution token name");
            }
            p.decls.emplace_back(std::move(d));
        } else if (at_kw("diagram")) {
            take();
            DiagramDecl d;
            d.name = expect_ident("diagram name");
            check_fresh(d.name);
            expect(Tok::Equals, "'='");
            d.term = parse_expr();
            typecheck(d.term);  // TypeError propagates
            diagrams_[d.name] = d.term;
            p.decls.emplace_back(std::move(d));
        } else {
            fail("expected a declaration" + describe_cur(),
                 "'space', 'atom', 'control' or 'diagram'");
        }
    }

    Signature parse_siglist() {
        Signature sig;
        // Optional parentheses: "()" is the empty signature, "(H,K)" is an
        // accepted alternative spelling of "H,K".
        if (at(Tok::LParen)) {
            take();
            if (at(Tok::RParen)) {
                take();
                return sig;
            }
            sig = parse_siglist();
            expect(Tok::RParen, "')'");
            return sig;
        }
        for (;;) {
            Token t = expect(Tok::Ident, "space name");
            auto it = spaces_.find(t.text);
            if (it == spaces_.end())
                throw ParseError(t.line, t.col, "unknown space '" + t.text + "'", "");
            sig.spaces.push_back({t.text, it->second});
            if (!at(Tok::Comma)) return sig;
            take();
        }
    }

    Diagram parse_expr() {
        Diagram d = parse_tens();
        while (at_kw("then")) {
            take();
            d = make_seq(d, parse_tens());
        }
        return d;
    }

    Diagram parse_tens() {
        Diagram d = parse_prim();
        while (at(Tok::Star)) {
            take();
            d = make_tensor(d, parse_prim());
        }
        return d;
    }

    Diagram parse_prim() {
        if (at_kw("id")) {
            take();
            expect(Tok::LBrack, "'['");
            Signature sig = parse_siglist();
            expect(Tok::RBrack, "']'");
            return make_id(std::move(sig));
        }
        if (at_kw("perm")) {
            Token kw = take();
            expect(Tok::LBrack, "'['");
            Permutation pi;
            pi.map.push_back(static_cast<int>(expect(Tok::Int, "permutation entry").value));
            while (at(Tok::Comma)) {
                take();
                pi.map.push_back(static_cast<int>(expect(Tok::Int, "permutation entry").value));
            }
            expect(Tok::RBrack, "']'");
            expect(Tok::LParen, "'('");
            Diagram inner = parse_expr();
            expect(Tok::RParen, "')'");
            if (!pi.valid())
                throw ParseError(kw.line, kw.col, "invalid permutation", "");
            // perm[pi](id[sig]) denotes the bare permutation generator.
            if (inner->kind == DiagramKind::Id) return make_perm(std::move(pi), inner->sig);
            return make_seq(inner, make_perm(std::move(pi), typecheck(inner).out));
        }
        if (at_kw("feedback")) {
            take();
            expect(Tok::LBrack, "'['");
            int i = static_cast<int>(expect(Tok::Int, "output port index").value);
            expect(Tok::Comma, "','");
            int j = static_cast<int>(expect(Tok::Int, "input port index").value);
            expect(Tok::RBrack, "']'");
            expect(Tok::LParen, "'('");
            Diagram inner = parse_expr();
            expect(Tok::RParen, "')'");
            return make_feedback(i, j, inner);
        }
        if (at_kw("ctrl")) {
            take();
            expect(Tok::LBrack, "'['");
            ControlExpr u = parse_ctrlexpr();
            expect(Tok::RBrack, "']'");
            expect(Tok::LParen, "'('");
            Diagram inner = parse_expr();
            expect(Tok::RParen, "')'");
            // ctrl[u](id[sig]) denotes the bare control generator.
            if (inner->kind == DiagramKind::Id) return make_ctrl(u, inner->sig, inner->sig);
            Signature s = typecheck(inner).out;
            return make_seq(inner, make_ctrl(u, s, s));
        }
        if (at_kw("dagger")) {
            take();
            expect(Tok::LParen, "'('");
            Diagram inner = parse_expr();
            expect(Tok::RParen, "')'");
            return make_dagger(inner);
        }
        if (at(Tok::LParen)) {
            take();
            Diagram inner = parse_expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (at(Tok::Ident)) {
            Token t = take();
            if (auto it = atoms_.find(t.text); it != atoms_.end())
                return make_atom(t.text, it->second.in, it->second.out);
            if (auto it = diagrams_.find(t.text); it != diagrams_.end()) return it->second;
            throw ParseError(t.line, t.col, "unknown atom or diagram '" + t.text + "'", "");
        }
        fail("expected an expression" + describe_cur(),
             "identifier, 'id', 'perm', 'feedback', 'ctrl', 'dagger' or '('");
    }

    ControlExpr parse_ctrl_atom() {
        Token t = expect(Tok::Ident, "control token or 'e'");
        ControlExpr e;
        if (t.text == "e") {
            e = ctrl_neutral();
        } else {
            if (!controls_.count(t.text))
                throw ParseError(t.line, t.col, "unknown control token '" + t.text + "'", "");
            e = ctrl_token(t.text);
        }
        while (at(Tok::CaretStar)) {
            take();
            e = ctrl_involute(std::move(e));
        }
        return e;
    }

    ControlExpr parse_ctrlexpr() {
        ControlExpr e = parse_ctrl_atom();
        while (at(Tok::Star)) {
            take();
            e = ctrl_star(std::move(e), parse_ctrl_atom());
        }
        return e;
    }

    std::vector<Token> toks_;
    std::size_t idx_ = 0;
    std::map<std::string, int> spaces_;
    std::map<std::string, AtomDecl> atoms_;
    std::set<std::string> controls_;
    std::map<std::string, Diagram> diagrams_;
    std::set<std::string> names_;
};

}  // namespace

SourceProgram parse(const std::string& text) { return Parser(text).run(); }

}  // namespace snop
