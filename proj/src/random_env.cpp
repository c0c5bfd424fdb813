#include "snop/random_env.hpp"

#include <cmath>
#include <map>
#include <set>

#include "snop/semantics.hpp"

namespace snop {

cplx Rng::gaussian() {
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}

namespace {

ComplexMatrix random_unitary(Rng& rng, int dim) {
    ComplexMatrix q = ComplexMatrix::identity(static_cast<std::size_t>(dim));
    for (int p = 0; p < dim - 1; ++p)
        for (int r = p + 1; r < dim; ++r) {
            const double th = 2.0 * M_PI * rng.uniform();
            const double ph = 2.0 * M_PI * rng.uniform();
            const double c = std::cos(th), s = std::sin(th);
            const cplx e1 = std::polar(1.0, ph);
            for (int col = 0; col < dim; ++col) {
                const cplx a = q(static_cast<std::size_t>(p), static_cast<std::size_t>(col));
                const cplx b = q(static_cast<std::size_t>(r), static_cast<std::size_t>(col));
                q(static_cast<std::size_t>(p), static_cast<std::size_t>(col)) = c * a - s * e1 * b;
                q(static_cast<std::size_t>(r), static_cast<std::size_t>(col)) =
                    s * std::conj(e1) * a + c * b;
            }
        }
    return q;
}

ComplexMatrix conjugate_diag(const ComplexMatrix& q, const std::vector<cplx>& diag) {
    const std::size_t n = q.rows();
    ComplexMatrix qd(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) qd(i, j) = q(i, j) * diag[j];
    return matmul(qd, adjoint(q));
}

ComplexMatrix matrix_power(const ComplexMatrix& m, int p) {
    ComplexMatrix acc = ComplexMatrix::identity(m.rows());
    for (int i = 0; i < p; ++i) acc = matmul(acc, m);
    return acc;
}

}  // namespace

ComplexMatrix random_cyclic_unitary(Rng& rng, int dim, int order) {
    ComplexMatrix q = random_unitary(rng, dim);
    std::vector<cplx> diag(static_cast<std::size_t>(dim));
    for (auto& d : diag)
        d = std::polar(1.0, 2.0 * M_PI * rng.below(order) / static_cast<double>(order));
    return conjugate_diag(q, diag);
}

ControlMonoid random_cyclic_monoid(Rng& rng, const std::vector<std::string>& tokens,
                                   const std::vector<SpaceRef>& spaces) {
    // Z/(m+1): element 0 is the neutral "u0", element i is tokens[i-1].
    const int m = static_cast<int>(tokens.size());
    const int order = m + 1;
    ControlMonoid cm;
    cm.neutral = "u0";
    cm.tokens.push_back(cm.neutral);
    for (const auto& t : tokens) cm.tokens.push_back(t);
    auto name_of = [&](int i) { return i == 0 ? cm.neutral : tokens[static_cast<std::size_t>(i - 1)]; };
    for (int i = 0; i < order; ++i)
        for (int j = 0; j < order; ++j)
            cm.star[{name_of(i), name_of(j)}] = name_of((i + j) % order);
    for (int i = 0; i < order; ++i) cm.involution[name_of(i)] = name_of((order - i) % order);
    for (const auto& sp : spaces) {
        ComplexMatrix u = random_cyclic_unitary(rng, sp.dim, order);
        for (int i = 0; i < order; ++i)
            cm.inject[{name_of(i), sp.name}] = matrix_power(u, i);
    }
    return cm;
}

ControlMonoid counter_monoid(Rng& rng, int k, const std::vector<SpaceRef>& spaces) {
    if (k < 2) throw std::invalid_argument("counter_monoid: need k >= 2 tokens");
    ControlMonoid cm;
    for (int i = 0; i < k; ++i) cm.tokens.push_back("u" + std::to_string(i));
    cm.neutral = "u0";
    auto name_of = [&](int i) { return cm.tokens[static_cast<std::size_t>(i)]; };
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            cm.star[{name_of(i), name_of(j)}] = name_of(std::min(i + j, k - 1));
    // Commutative, so the identity map is a valid involution.
    for (int i = 0; i < k; ++i) cm.involution[name_of(i)] = name_of(i);
    for (const auto& sp : spaces) {
        // Random orthogonal projector: powers collapse, matching saturation.
        ComplexMatrix q = random_unitary(rng, sp.dim);
        std::vector<cplx> diag(static_cast<std::size_t>(sp.dim));
        for (auto& d : diag) d = (rng.uniform() < 0.5) ? cplx(0.0) : cplx(1.0);
        ComplexMatrix p = conjugate_diag(q, diag);
        for (int i = 0; i < k; ++i)
            cm.inject[{name_of(i), sp.name}] = i == 0 ? ComplexMatrix::identity(
                                                            static_cast<std::size_t>(sp.dim))
                                                      : p;
    }
    return cm;
}

namespace {

struct Usage {
    std::map<std::string, std::pair<int, int>> atoms;  // name -> (out wire, in wire)
    std::set<std::string> tokens;
    std::map<std::string, int> ctrl_spaces;  // space name -> dim
    bool has_feedback = false;
};

void collect(const Diagram& d, Usage& u) {
    switch (d->kind) {
        case DiagramKind::Id:
        case DiagramKind::Perm:
            return;
        case DiagramKind::Atom: {
            const Signature& in = d->daggered ? d->sig2 : d->sig;
            const Signature& out = d->daggered ? d->sig : d->sig2;
            u.atoms.emplace(d->name, std::make_pair(out.wire_dim(), in.wire_dim()));
            return;
        }
        case DiagramKind::Ctrl: {
            for (const auto& l : ctrl_word(d->ctrl)) u.tokens.insert(l.token);
            for (const auto& sp : d->sig.spaces) u.ctrl_spaces.emplace(sp.name, sp.dim);
            return;
        }
        case DiagramKind::Feedback:
            u.has_feedback = true;
            collect(d->a, u);
            return;
        case DiagramKind::Tensor:
        case DiagramKind::Seq:
            collect(d->a, u);
            collect(d->b, u);
            return;
        case DiagramKind::Dagger:
            collect(d->a, u);
            return;
    }
}

}  // namespace

Environment random_environment(const Diagram& d, std::uint64_t seed) {
    Rng rng(seed);
    Usage use;
    collect(d, use);

    Environment env;
    env.options.feedback_mode = FeedbackMode::Relaxed;
    for (const auto& [name, shape] : use.atoms) {
        const auto [rows, cols] = shape;
        ComplexMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
        const double sc = 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = sc * rng.gaussian();
        env.atoms.emplace(name, std::move(m));
    }
    if (!use.tokens.empty() || !use.ctrl_spaces.empty()) {
        std::vector<std::string> tokens(use.tokens.begin(), use.tokens.end());
        if (tokens.empty()) tokens.push_back("u1");
        std::vector<SpaceRef> spaces;
        for (const auto& [name, dim] : use.ctrl_spaces) spaces.push_back({name, dim});
        env.monoid = random_cyclic_monoid(rng, tokens, spaces);
        env.monoid->validate(1e-9);
    }

    // Rescale atoms until every loop gain is at most 0.9.
    if (use.has_feedback) {
        for (int attempt = 0;; ++attempt) {
            if (attempt > 500)
                throw std::runtime_error(
                    "random_environment: could not rescale feedback loops to kappa <= 0.9");
            double max_kappa = 0.0;
            bool singular = false;
            EvalReport rep;
            try {
                eval(d, env, &rep);
            } catch (const SingularLoop&) {
                singular = true;
            }
            for (const auto& f : rep.feedbacks) max_kappa = std::max(max_kappa, f.kappa);
            if (!singular && max_kappa <= 0.9) break;
            for (auto& [name, m] : env.atoms) m = scale(m, cplx(0.8, 0.0));
        }
    }
    env.options.feedback_mode = FeedbackMode::Strict;
    return env;
}

}  // namespace snop
