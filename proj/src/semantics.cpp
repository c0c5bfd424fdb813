#include "snop/semantics.hpp"

#include <cmath>

namespace snop {

namespace {

double norm_or_zero(const ComplexMatrix& m) {
    if (m.empty()) return 0.0;
    return op_norm_value(m);
}

/// Row/column index ranges of each port in a signature's wire bundle.
std::vector<int> port_offsets(const Signature& s) {
    std::vector<int> off{0};
    for (const auto& sp : s.spaces) off.push_back(off.back() + sp.dim);
    return off;
}

/// Gather the submatrix with the given row/column index sets.
ComplexMatrix gather(const ComplexMatrix& m, const std::vector<int>& rows,
                     const std::vector<int>& cols) {
    ComplexMatrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(i, j) = m(static_cast<std::size_t>(rows[i]), static_cast<std::size_t>(cols[j]));
    return out;
}

std::vector<int> indices_excluding_block(const std::vector<int>& off, int skip_block) {
    std::vector<int> idx;
    const int nblocks = static_cast<int>(off.size()) - 1;
    for (int b = 0; b < nblocks; ++b) {
        if (b == skip_block) continue;
        for (int k = off[static_cast<std::size_t>(b)]; k < off[static_cast<std::size_t>(b) + 1];
             ++k)
            idx.push_back(k);
    }
    return idx;
}

std::vector<int> indices_of_block(const std::vector<int>& off, int block) {
    std::vector<int> idx;
    for (int k = off[static_cast<std::size_t>(block)]; k < off[static_cast<std::size_t>(block) + 1];
         ++k)
        idx.push_back(k);
    return idx;
}

ComplexMatrix block_diag_injections(const ControlMonoid& m, const std::string& token,
                                    const Signature& sig) {
    ComplexMatrix out(0, 0);
    bool first = true;
    for (const auto& sp : sig.spaces) {
        ComplexMatrix inj = m.inject_of(token, sp);
        out = first ? inj : direct_sum(out, inj);
        first = false;
    }
    if (first) return ComplexMatrix(0, 0);
    return out;
}

}  // namespace

ComplexMatrix feedback_close(const ComplexMatrix& m_yx, const ComplexMatrix& m_yf,
                             const ComplexMatrix& m_fx, const ComplexMatrix& m_ff,
                             const EnvOptions& options, FeedbackReport& report) {
    report.mode = options.feedback_mode;
    report.m_yx = m_yx;
    report.m_yf = m_yf;
    report.m_fx = m_fx;
    report.m_ff = m_ff;
    report.kappa = norm_or_zero(m_ff);
    report.spectral_radius = m_ff.empty() ? 0.0 : spectral_radius_estimate(m_ff);
    report.strict_ok = report.kappa < 1.0;

    const ComplexMatrix eye = ComplexMatrix::identity(m_ff.rows());

    if (options.feedback_mode == FeedbackMode::Strict) {
        if (!(report.kappa < 1.0)) throw IllPosedFeedback(report.kappa);

        // Neumann series: sum_n M_ff^n M_fx, truncated when the tail bound
        // kappa^(N+1)/(1-kappa) * ||M_fx|| drops below tol.
        const double nfx = norm_or_zero(m_fx);
        ComplexMatrix term = m_fx;
        ComplexMatrix sum = m_fx;
        int n = 0;
        double tail = report.kappa / (1.0 - report.kappa) * nfx;
        while (tail >= options.tol) {
            term = matmul(m_ff, term);
            sum = add(sum, term);
            ++n;
            tail *= report.kappa;
            if (n > 1000000)
                throw ConvergenceError("Neumann series did not reach tolerance (kappa = " +
                                       std::to_string(report.kappa) + ")");
        }
        report.neumann_terms = n + 1;
        report.truncation_bound = tail;

        // Cross-check against the direct solve.
        ComplexMatrix direct = solve(sub(eye, m_ff), m_fx);
        report.relaxed_ok = true;
        if (!sum.empty() && sub(sum, direct).max_abs() > 1e-8 * (1.0 + direct.max_abs()))
            throw ConvergenceError("Neumann sum disagrees with direct solve");

        ComplexMatrix loop = matmul(m_yf, direct);
        report.loop_norm_actual = norm_or_zero(loop);
        report.loop_norm_bound = norm_or_zero(m_yf) * nfx / (1.0 - report.kappa);
        return add(m_yx, matmul(m_yf, sum));
    }

    // Relaxed mode: only invertibility of I - M_ff is required.
    ComplexMatrix x;
    try {
        x = solve(sub(eye, m_ff), m_fx);
    } catch (const SingularMatrix&) {
        throw SingularLoop("I - M_ff is singular (kappa = " + std::to_string(report.kappa) + ")");
    }
    report.relaxed_ok = true;
    ComplexMatrix loop = matmul(m_yf, x);
    report.loop_norm_actual = norm_or_zero(loop);
    if (report.kappa < 1.0)
        report.loop_norm_bound = norm_or_zero(m_yf) * norm_or_zero(m_fx) / (1.0 - report.kappa);
    return add(m_yx, loop);
}

OperatorValue eval(const Diagram& d, const Environment& env, EvalReport* report) {
    switch (d->kind) {
        case DiagramKind::Id:
            return {ComplexMatrix::identity(static_cast<std::size_t>(d->sig.wire_dim())), d->sig,
                    d->sig};
        case DiagramKind::Atom: {
            const ComplexMatrix& base = env.atom(d->name);
            const Signature& orig_in = d->daggered ? d->sig2 : d->sig;
            const Signature& orig_out = d->daggered ? d->sig : d->sig2;
            if (base.rows() != static_cast<std::size_t>(orig_out.wire_dim()) ||
                base.cols() != static_cast<std::size_t>(orig_in.wire_dim()))
                throw EnvError("atom '" + d->name + "' bound to a matrix of wrong shape");
            if (d->daggered) return {adjoint(base), d->sig, d->sig2};
            return {base, d->sig, d->sig2};
        }
        case DiagramKind::Tensor: {
            OperatorValue l = eval(d->a, env, report);
            OperatorValue r = eval(d->b, env, report);
            OperatorValue out;
            out.matrix = direct_sum(l.matrix, r.matrix);
            out.in_sig = l.in_sig;
            out.in_sig.spaces.insert(out.in_sig.spaces.end(), r.in_sig.spaces.begin(),
                                     r.in_sig.spaces.end());
            out.out_sig = l.out_sig;
            out.out_sig.spaces.insert(out.out_sig.spaces.end(), r.out_sig.spaces.begin(),
                                      r.out_sig.spaces.end());
            return out;
        }
        case DiagramKind::Seq: {
            OperatorValue f = eval(d->a, env, report);
            OperatorValue g = eval(d->b, env, report);
            if (g.matrix.cols() != f.matrix.rows())
                throw ShapeError("sequential composition shape mismatch");
            return {matmul(g.matrix, f.matrix), f.in_sig, g.out_sig};
        }
        case DiagramKind::Perm: {
            const Signature out_sig = permute_signature(d->sig, d->perm);
            const std::vector<int> in_off = port_offsets(d->sig);
            const std::vector<int> out_off = port_offsets(out_sig);
            ComplexMatrix w(static_cast<std::size_t>(out_sig.wire_dim()),
                            static_cast<std::size_t>(d->sig.wire_dim()));
            for (std::size_t k = 0; k < out_sig.spaces.size(); ++k) {
                const int src = d->perm.map[k] - 1;  // out port k carries in port pi(k)
                const int dim = out_sig.spaces[k].dim;
                for (int t = 0; t < dim; ++t)
                    w(static_cast<std::size_t>(out_off[k] + t),
                      static_cast<std::size_t>(in_off[static_cast<std::size_t>(src)] + t)) = 1.0;
            }
            return {std::move(w), d->sig, out_sig};
        }
        case DiagramKind::Ctrl: {
            if (!d->sig.dims_match(d->sig2))
                throw ShapeError("control with non-square injection signatures");
            // The neutral control is the identity without any monoid bound.
            if (ctrl_word(d->ctrl).empty())
                return {ComplexMatrix::identity(static_cast<std::size_t>(d->sig.wire_dim())),
                        d->sig, d->sig2};
            const ControlMonoid& m = env.require_monoid();
            const std::string token = m.resolve_word(ctrl_word(d->ctrl));
            return {block_diag_injections(m, token, d->sig), d->sig, d->sig2};
        }
        case DiagramKind::Feedback: {
            OperatorValue inner = eval(d->a, env, report);
            const int i = d->fb_out - 1;
            const int j = d->fb_in - 1;
            const std::vector<int> row_off = port_offsets(inner.out_sig);
            const std::vector<int> col_off = port_offsets(inner.in_sig);
            const std::vector<int> rows_y = indices_excluding_block(row_off, i);
            const std::vector<int> rows_f = indices_of_block(row_off, i);
            const std::vector<int> cols_x = indices_excluding_block(col_off, j);
            const std::vector<int> cols_f = indices_of_block(col_off, j);

            FeedbackReport rep;
            ComplexMatrix closed;
            try {
                closed = feedback_close(
                    gather(inner.matrix, rows_y, cols_x), gather(inner.matrix, rows_y, cols_f),
                    gather(inner.matrix, rows_f, cols_x), gather(inner.matrix, rows_f, cols_f),
                    env.options, rep);
            } catch (...) {
                // Keep the partially filled report (kappa etc.) for diagnosis.
                if (report) report->feedbacks.push_back(std::move(rep));
                throw;
            }
            if (report) report->feedbacks.push_back(std::move(rep));

            OperatorValue out;
            out.matrix = std::move(closed);
            for (std::size_t k = 0; k < inner.in_sig.spaces.size(); ++k)
                if (k != static_cast<std::size_t>(j))
                    out.in_sig.spaces.push_back(inner.in_sig.spaces[k]);
            for (std::size_t k = 0; k < inner.out_sig.spaces.size(); ++k)
                if (k != static_cast<std::size_t>(i))
                    out.out_sig.spaces.push_back(inner.out_sig.spaces[k]);
            return out;
        }
        case DiagramKind::Dagger: {
            OperatorValue inner = eval(d->a, env, report);
            return {adjoint(inner.matrix), inner.out_sig, inner.in_sig};
        }
    }
    throw TypeError("unreachable");
}

OperatorValue control_action(const ControlExpr& u, const Signature& sig, const Environment& env) {
    if (ctrl_word(u).empty())
        return {ComplexMatrix::identity(static_cast<std::size_t>(sig.wire_dim())), sig, sig};
    const ControlMonoid& m = env.require_monoid();
    const std::string token = m.resolve_word(ctrl_word(u));
    return {block_diag_injections(m, token, sig), sig, sig};
}

std::pair<double, double> eval_norm_bound(const Diagram& d, const Environment& env) {
    EvalReport rep;
    eval(d, env, &rep);
    if (rep.feedbacks.empty()) throw TypeError("eval_norm_bound: diagram has no feedback");
    const FeedbackReport& f = rep.feedbacks.back();
    if (!(f.kappa < 1.0)) throw IllPosedFeedback(f.kappa);
    if (f.loop_norm_actual > f.loop_norm_bound + 1e-9)
        throw std::runtime_error("feedback-stability bound violated: actual " +
                                 std::to_string(f.loop_norm_actual) + " > bound " +
                                 std::to_string(f.loop_norm_bound));
    return {f.loop_norm_actual, f.loop_norm_bound};
}

}  // namespace snop
