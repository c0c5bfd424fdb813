#include "snop/environment.hpp"

#include <algorithm>
#include <fstream>

namespace snop {

const std::string& ControlMonoid::star_of(const std::string& a, const std::string& b) const {
    auto it = star.find({a, b});
    if (it == star.end()) throw EnvError("star table missing entry for (" + a + ", " + b + ")");
    return it->second;
}

const std::string& ControlMonoid::involute(const std::string& a) const {
    auto it = involution.find(a);
    if (it == involution.end())
        throw UnboundToken("no involution defined for control token '" + a + "'");
    return it->second;
}

std::string ControlMonoid::resolve_word(const std::vector<CtrlLetter>& word) const {
    std::string acc = neutral;
    for (const auto& l : word) {
        if (std::find(tokens.begin(), tokens.end(), l.token) == tokens.end())
            throw UnboundToken("unbound control token '" + l.token + "'");
        const std::string t = l.involuted ? involute(l.token) : l.token;
        acc = star_of(acc, t);
    }
    return acc;
}

ComplexMatrix ControlMonoid::inject_of(const std::string& token, const SpaceRef& space) const {
    auto it = inject.find({token, space.name});
    if (it == inject.end()) {
        if (token == neutral) return ComplexMatrix::identity(space.dim);
        throw UnboundToken("no injection for control token '" + token + "' on space '" +
                           space.name + "'");
    }
    const ComplexMatrix& m = it->second;
    if (m.rows() != space.dim || m.cols() != space.dim)
        throw EnvError("injection for '" + token + "' on '" + space.name +
                       "' has wrong shape for dim " + std::to_string(space.dim));
    return m;
}

void ControlMonoid::validate(double tol) const {
    if (tokens.empty()) throw EnvError("control monoid has no tokens");
    auto is_token = [&](const std::string& t) {
        return std::find(tokens.begin(), tokens.end(), t) != tokens.end();
    };
    if (!is_token(neutral)) throw EnvError("neutral '" + neutral + "' is not a declared token");

    // Totality and closure of the star table.
    for (const auto& a : tokens)
        for (const auto& b : tokens) {
            const std::string& c = star_of(a, b);
            if (!is_token(c))
                throw EnvError("star(" + a + ", " + b + ") = '" + c + "' is not a token");
        }
    // Two-sided neutrality.
    for (const auto& a : tokens) {
        if (star_of(neutral, a) != a || star_of(a, neutral) != a)
            throw EnvError("neutral '" + neutral + "' is not a two-sided identity at '" + a + "'");
    }
    // Associativity.
    for (const auto& a : tokens)
        for (const auto& b : tokens)
            for (const auto& c : tokens)
                if (star_of(star_of(a, b), c) != star_of(a, star_of(b, c)))
                    throw EnvError("star table is not associative at (" + a + ", " + b + ", " + c +
                                   ")");
    // Involution laws, when present.
    if (has_involution()) {
        for (const auto& a : tokens) {
            const std::string& as = involute(a);
            if (!is_token(as)) throw EnvError("involution of '" + a + "' is not a token");
            if (involute(as) != a) throw EnvError("involution is not involutive at '" + a + "'");
        }
        for (const auto& a : tokens)
            for (const auto& b : tokens)
                if (involute(star_of(a, b)) != star_of(involute(b), involute(a)))
                    throw EnvError("involution is not an anti-homomorphism at (" + a + ", " + b +
                                   ")");
    }
    // Injection laws per space: every token total on each space seen, the
    // neutral injects as the identity, and inject is a homomorphism
    // (inject(a ⋆ b) = inject(b) · inject(a)).
    std::map<std::string, int> space_dims;
    for (const auto& [key, m] : inject) {
        if (!is_token(key.first))
            throw EnvError("injection bound for unknown token '" + key.first + "'");
        if (m.rows() != m.cols()) throw EnvError("injection matrices must be square");
        auto [it, fresh] = space_dims.emplace(key.second, m.rows());
        if (!fresh && it->second != m.rows())
            throw EnvError("inconsistent injection dims on space '" + key.second + "'");
    }
    for (const auto& [space, dim] : space_dims) {
        SpaceRef s{space, dim};
        ComplexMatrix in0 = inject_of(neutral, s);
        ComplexMatrix idm = ComplexMatrix::identity(dim);
        if (sub(in0, idm).max_abs() > tol)
            throw EnvError("inject(neutral) is not the identity on space '" + space + "'");
        for (const auto& a : tokens)
            for (const auto& b : tokens) {
                ComplexMatrix lhs = inject_of(star_of(a, b), s);
                ComplexMatrix rhs = matmul(inject_of(b, s), inject_of(a, s));
                if (sub(lhs, rhs).max_abs() > tol)
                    throw EnvError("injection homomorphism fails at (" + a + ", " + b +
                                   ") on space '" + space + "'");
            }
    }
}

const ComplexMatrix& Environment::atom(const std::string& name) const {
    auto it = atoms.find(name);
    if (it == atoms.end()) throw UnboundAtom("unbound atom '" + name + "'");
    return it->second;
}

const ControlMonoid& Environment::require_monoid() const {
    if (!monoid) throw UnboundToken("environment declares no control monoid");
    return *monoid;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
        throw EnvError("matrix object requires fields rows, cols, entries");
    const int r = j.at("rows").get<int>();
    const int c = j.at("cols").get<int>();
    if (r < 1 || c < 1) throw EnvError("matrix dims must be positive");
    const auto& e = j.at("entries");
    if (!e.is_array() || e.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c))
        throw EnvError("entries length must equal rows*cols");
    ComplexMatrix m(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) {
            const auto& cell = e.at(static_cast<std::size_t>(i) * static_cast<std::size_t>(c) +
                                    static_cast<std::size_t>(k));
            if (!cell.is_array() || cell.size() != 2)
                throw EnvError("each entry must be a [re, im] pair");
            m(i, k) = cplx(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    if (!m.all_finite()) throw EnvError("matrix entries must be finite");
    return m;
}

nlohmann::json matrix_to_json(const ComplexMatrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    nlohmann::json entries = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i)
        for (int k = 0; k < m.cols(); ++k)
            entries.push_back({m(i, k).real(), m(i, k).imag()});
    j["entries"] = std::move(entries);
    return j;
}

Environment load_environment(const nlohmann::json& j) {
    Environment env;
    if (!j.is_object()) throw EnvError("environment must be a JSON object");

    if (j.contains("atoms")) {
        for (const auto& [name, mj] : j.at("atoms").items())
            env.atoms.emplace(name, matrix_from_json(mj));
    }

    if (j.contains("control")) {
        const auto& c = j.at("control");
        ControlMonoid m;
        if (!c.contains("tokens") || !c.contains("neutral") || !c.contains("star"))
            throw EnvError("control section requires tokens, neutral, star");
        for (const auto& t : c.at("tokens")) m.tokens.push_back(t.get<std::string>());
        m.neutral = c.at("neutral").get<std::string>();
        for (const auto& [key, val] : c.at("star").items()) {
            auto comma = key.find(',');
            if (comma == std::string::npos)
                throw EnvError("star key must be of the form \"a,b\": " + key);
            m.star[{key.substr(0, comma), key.substr(comma + 1)}] = val.get<std::string>();
        }
        if (c.contains("involution"))
            for (const auto& [key, val] : c.at("involution").items())
                m.involution[key] = val.get<std::string>();
        if (c.contains("inject"))
            for (const auto& [key, val] : c.at("inject").items()) {
                auto at = key.find('@');
                if (at == std::string::npos)
                    throw EnvError("inject key must be of the form \"token@Space\": " + key);
                m.inject[{key.substr(0, at), key.substr(at + 1)}] = matrix_from_json(val);
            }
        env.monoid = std::move(m);
    }

    if (j.contains("options")) {
        const auto& o = j.at("options");
        if (o.contains("feedback_mode")) {
            const std::string mode = o.at("feedback_mode").get<std::string>();
            if (mode == "strict")
                env.options.feedback_mode = FeedbackMode::Strict;
            else if (mode == "relaxed")
                env.options.feedback_mode = FeedbackMode::Relaxed;
            else
                throw EnvError("feedback_mode must be \"strict\" or \"relaxed\"");
        }
        if (o.contains("tol")) {
            env.options.tol = o.at("tol").get<double>();
            if (!(env.options.tol > 0)) throw EnvError("tol must be positive");
        }
    }

    if (env.monoid) env.monoid->validate(env.options.tol);
    return env;
}

Environment load_environment_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EnvError("cannot open environment file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EnvError("invalid JSON in " + path + ": " + e.what());
    }
    return load_environment(j);
}

}  // namespace snop
