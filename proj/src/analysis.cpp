#include "snop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "snop/linalg.hpp"

namespace snop {

namespace {

double op_or_zero(const ComplexMatrix& m) { return m.empty() ? 0.0 : op_norm_value(m); }

}  // namespace

std::vector<FeedbackReport> well_posedness(const Diagram& d, const Environment& env) {
    Environment probe = env;
    probe.options.feedback_mode = FeedbackMode::Relaxed;
    EvalReport rep;
    try {
        eval(d, probe, &rep);
    } catch (const std::exception&) {
        // Loops nested above a singular loop cannot be probed; their reports
        // are simply absent.
    }
    return rep.feedbacks;
}

LipschitzReport control_lipschitz(const Diagram& d,
                                  const std::function<Environment(double)>& env_at,
                                  const std::function<ComplexMatrix(double)>& inject_at,
                                  const std::vector<double>& grid) {
    if (grid.size() < 2) throw std::invalid_argument("control_lipschitz: need >= 2 grid points");

    LipschitzReport out;
    std::vector<ComplexMatrix> values;
    std::vector<ComplexMatrix> injects;
    values.reserve(grid.size());
    injects.reserve(grid.size());
    for (double t : grid) {
        EvalReport rep;
        OperatorValue v = eval(d, env_at(t), &rep);
        for (const auto& f : rep.feedbacks) {
            if (!(f.kappa < 1.0)) throw IllPosedFeedback(f.kappa);
            out.alpha = std::max(out.alpha, f.kappa);
        }
        values.push_back(std::move(v.matrix));
        injects.push_back(inject_at(t));
    }

    auto max_ratio = [&](const std::vector<ComplexMatrix>& seq, std::size_t stride) {
        double best = 0.0;
        for (std::size_t i = 0; i < grid.size(); i += stride)
            for (std::size_t j = i + stride; j < grid.size(); j += stride) {
                const double dt = std::abs(grid[j] - grid[i]);
                if (dt == 0.0) continue;
                best = std::max(best, op_or_zero(sub(seq[j], seq[i])) / dt);
            }
        return best;
    };

    out.L = max_ratio(injects, 1);
    const double l_coarse = max_ratio(injects, 2);
    out.divergent = out.L > 0.0 && out.L > 1.5 * l_coarse;
    out.empirical_max_ratio = max_ratio(values, 1);
    out.predicted_bound = out.alpha < 1.0
                              ? out.L / (1.0 - out.alpha)
                              : std::numeric_limits<double>::infinity();
    return out;
}

DerivativeReport control_derivative(const Diagram& d,
                                    const std::function<Environment(double)>& env_at, double t0,
                                    double h) {
    if (!(h > 0)) throw std::invalid_argument("control_derivative: h must be positive");
    auto value = [&](double t) { return eval(d, env_at(t)).matrix; };
    auto central = [&](double step) {
        return scale(sub(value(t0 + step), value(t0 - step)), cplx(1.0 / (2.0 * step), 0.0));
    };
    ComplexMatrix d_h = central(h);
    ComplexMatrix d_h2 = central(h / 2.0);
    DerivativeReport rep;
    rep.error_estimate = sub(d_h, d_h2).max_abs();
    rep.derivative = std::move(d_h2);
    rep.h = h;
    return rep;
}

// ---------------------------------------------------------------------------
// Spectral flow

SpectralFlowReport spectral_flow(const std::vector<ComplexMatrix>& path, bool is_loop) {
    constexpr double kHermTol = 1e-10;
    constexpr double kZeroTol = 1e-10;
    const std::size_t m = path.size();
    if (m < 2) throw std::invalid_argument("spectral_flow: need >= 2 samples");

    std::vector<std::vector<double>> vals(m);
    std::vector<ComplexMatrix> vecs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const ComplexMatrix& a = path[k];
        if (a.rows() != a.cols()) throw std::invalid_argument("spectral_flow: square matrices only");
        ComplexMatrix herm = scale(add(a, adjoint(a)), cplx(0.5, 0.0));
        if (sub(a, herm).max_abs() > kHermTol * (1.0 + a.max_abs()))
            throw std::invalid_argument("spectral_flow: sample " + std::to_string(k) +
                                        " is not Hermitian within 1e-10");
        EigenSystem es = eig_hermitian(herm);
        vals[k] = std::move(es.values);
        vecs[k] = std::move(es.vectors);
    }

    auto near_zero_count = [&](std::size_t k) {
        int z = 0;
        for (double v : vals[k])
            if (std::abs(v) <= kZeroTol) ++z;
        return z;
    };
    std::vector<int> zc(m);
    for (std::size_t k = 0; k < m; ++k) zc[k] = near_zero_count(k);

    SpectralFlowReport rep;
    for (std::size_t k = 0; k < m; ++k)
        if (zc[k] > 1) rep.kernel_dim_ok = false;

    const bool constant_kernel =
        zc[0] == 1 && std::all_of(zc.begin(), zc.end(), [](int z) { return z == 1; });

    // Near-zero samples must either belong to a constant kernel bundle or be
    // flanked by opposite signs (a resolved crossing).
    if (!constant_kernel) {
        for (std::size_t k = 0; k < m; ++k) {
            if (zc[k] == 0) continue;
            for (std::size_t i = 0; i < vals[k].size(); ++i) {
                if (std::abs(vals[k][i]) > kZeroTol) continue;
                const bool interior = k > 0 && k + 1 < m;
                bool resolved = false;
                if (interior) {
                    const double prev = vals[k - 1][i];
                    const double next = vals[k + 1][i];
                    resolved = (prev < -kZeroTol && next > kZeroTol) ||
                               (prev > kZeroTol && next < -kZeroTol);
                }
                if (!resolved)
                    throw AmbiguousCrossing(
                        "eigenvalue within 1e-10 of zero at sample " + std::to_string(k) +
                        " without sign-change resolution; refine the path");
            }
        }
    }

    auto n_neg = [&](std::size_t k) {
        int c = 0;
        for (double v : vals[k])
            if (v < -kZeroTol) ++c;
        return c;
    };
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const int d = n_neg(k) - n_neg(k + 1);
        if (d == 0) continue;
        double t;
        if (zc[k + 1] > 0)
            t = static_cast<double>(k + 1) / static_cast<double>(m - 1);
        else if (zc[k] > 0)
            t = static_cast<double>(k) / static_cast<double>(m - 1);
        else
            t = (static_cast<double>(k) + 0.5) / static_cast<double>(m - 1);
        const int dir = d > 0 ? 1 : -1;
        for (int r = 0; r < std::abs(d); ++r) rep.crossings.push_back({t, dir});
    }
    rep.sf = n_neg(0) - n_neg(m - 1);

    // Orientability of the kernel line bundle, via sign transport of the
    // kernel vector around the loop.
    if (is_loop && constant_kernel) {
        auto kernel_vec = [&](std::size_t k) {
            std::size_t idx = 0;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < vals[k].size(); ++i)
                if (std::abs(vals[k][i]) < best) {
                    best = std::abs(vals[k][i]);
                    idx = i;
                }
            const std::size_t n = path[k].rows();
            std::vector<cplx> v(n);
            for (std::size_t r = 0; r < n; ++r) v[r] = vecs[k](r, idx);
            return v;
        };
        auto overlap = [](const std::vector<cplx>& a, const std::vector<cplx>& b) {
            cplx s = 0.0;
            for (std::size_t r = 0; r < a.size(); ++r) s += std::conj(a[r]) * b[r];
            return s;
        };
        std::vector<cplx> first = kernel_vec(0);
        std::vector<cplx> prev = first;
        for (std::size_t k = 1; k < m; ++k) {
            std::vector<cplx> cur = kernel_vec(k);
            cplx c = overlap(prev, cur);
            if (std::abs(c) < 0.1)
                throw AmbiguousCrossing("kernel transport lost continuity at sample " +
                                        std::to_string(k) + "; refine the path");
            if (c.real() < 0.0)
                for (auto& x : cur) x = -x;
            prev = std::move(cur);
        }
        // The last sample repeats the first; compare the transported vector.
        rep.orientable = overlap(prev, first).real() > 0.0;
    }
    return rep;
}

std::vector<ComplexMatrix> sf_path_upward(int samples) {
    std::vector<ComplexMatrix> path;
    for (int k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) / (samples - 1);
        ComplexMatrix a(1, 1);
        a(0, 0) = 2.0 * t - 1.0;
        path.push_back(std::move(a));
    }
    return path;
}

std::vector<ComplexMatrix> sf_loop_constant_gap(int samples) {
    std::vector<ComplexMatrix> path;
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * M_PI * static_cast<double>(k) / (samples - 1);
        ComplexMatrix a(2, 2);
        a(0, 0) = std::cos(th);
        a(0, 1) = std::sin(th);
        a(1, 0) = std::sin(th);
        a(1, 1) = -std::cos(th);
        path.push_back(std::move(a));
    }
    return path;
}

std::vector<ComplexMatrix> sf_loop_nonorientable(int samples) {
    // A(t) = R(pi t) diag(0, 1) R(pi t)^T: the kernel line rotates by pi over
    // one circuit (Moebius bundle), while the spectrum {0, 1} never moves.
    std::vector<ComplexMatrix> path;
    for (int k = 0; k < samples; ++k) {
        const double th = M_PI * static_cast<double>(k) / (samples - 1);
        const double c = std::cos(th), s = std::sin(th);
        ComplexMatrix a(2, 2);
        a(0, 0) = s * s;
        a(0, 1) = -s * c;
        a(1, 0) = -s * c;
        a(1, 1) = c * c;
        path.push_back(std::move(a));
    }
    return path;
}

std::vector<ComplexMatrix> sf_random_parity_loop(std::uint64_t seed, int samples) {
    // Deterministic LCG.
    std::uint64_t state = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    auto next = [&]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>((state >> 11) & 0xFFFFFFFFFFFFFULL) / 4503599627370496.0;
    };

    const int n = 3 + static_cast<int>(seed % 3);  // 3..5
    std::vector<double> extra(static_cast<std::size_t>(n) - 2);
    for (auto& e : extra) e = 0.5 + next();
    const double lam2 = 0.5 + next();

    // Fixed random real orthogonal conjugation: product of Givens rotations.
    ComplexMatrix q = ComplexMatrix::identity(static_cast<std::size_t>(n));
    for (int p = 0; p < n - 1; ++p)
        for (int r = p + 1; r < n; ++r) {
            const double th = 2.0 * M_PI * next();
            const double c = std::cos(th), s = std::sin(th);
            for (int col = 0; col < n; ++col) {
                const cplx a = q(static_cast<std::size_t>(p), static_cast<std::size_t>(col));
                const cplx b = q(static_cast<std::size_t>(r), static_cast<std::size_t>(col));
                q(static_cast<std::size_t>(p), static_cast<std::size_t>(col)) = c * a - s * b;
                q(static_cast<std::size_t>(r), static_cast<std::size_t>(col)) = s * a + c * b;
            }
        }

    std::vector<ComplexMatrix> path;
    for (int k = 0; k < samples; ++k) {
        // Even winding: the kernel line turns by 2*pi, so transport closes up.
        const double th = 2.0 * M_PI * static_cast<double>(k) / (samples - 1);
        const double c = std::cos(th), s = std::sin(th);
        ComplexMatrix b(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
        b(0, 0) = lam2 * s * s;
        b(0, 1) = -lam2 * s * c;
        b(1, 0) = -lam2 * s * c;
        b(1, 1) = lam2 * c * c;
        for (std::size_t e = 0; e < extra.size(); ++e) b(2 + e, 2 + e) = extra[e];
        path.push_back(matmul(matmul(q, b), adjoint(q)));
    }
    return path;
}

// ---------------------------------------------------------------------------
// PDE demo

PdeCase build_pde_case(int n, double gain) {
    if (n < 2) throw std::invalid_argument("build_pde_case: n must be >= 2");
    if (gain < 0) throw std::invalid_argument("build_pde_case: gain must be >= 0");
    const std::size_t un = static_cast<std::size_t>(n);

    // Analytic eigensystem of the (2,-1) Dirichlet Laplacian.
    std::vector<double> lambda(un);
    ComplexMatrix v(un, un);  // columns are normalized eigenvectors
    const double norm = std::sqrt(2.0 / (n + 1));
    for (int k = 0; k < n; ++k) {
        const double ang = M_PI * (k + 1) / (2.0 * (n + 1));
        lambda[static_cast<std::size_t>(k)] = 4.0 * std::sin(ang) * std::sin(ang);
        for (int i = 0; i < n; ++i)
            v(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
                norm * std::sin(M_PI * (i + 1) * (k + 1) / (n + 1));
    }

    PdeCase pc;
    pc.g = ComplexMatrix(un, un);
    pc.k = ComplexMatrix(un, un);
    const int half = (n + 1) / 2;
    for (int k = 0; k < n; ++k) {
        const double gk = gain * lambda[0] / lambda[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < un; ++i)
            for (std::size_t j = 0; j < un; ++j) {
                const cplx outer = v(i, static_cast<std::size_t>(k)) *
                                   std::conj(v(j, static_cast<std::size_t>(k)));
                pc.g(i, j) += gk * outer;
                if (k < half) pc.k(i, j) += outer;
            }
    }

    // Environment: junction S = [I, -I], duplicator C = [[I],[I]].
    ComplexMatrix s_mat(un, 2 * un);
    ComplexMatrix c_mat(2 * un, un);
    for (std::size_t i = 0; i < un; ++i) {
        s_mat(i, i) = 1.0;
        s_mat(i, un + i) = -1.0;
        c_mat(i, i) = 1.0;
        c_mat(un + i, i) = 1.0;
    }
    pc.env.atoms = {{"S", s_mat}, {"G", pc.g}, {"C", c_mat}, {"K", pc.k}};
    pc.env.options.feedback_mode = FeedbackMode::Relaxed;

    const Signature h{{{"H", n}}};
    const Signature hh{{{"H", n}, {"H", n}}};
    Diagram ga = make_atom("G", h, h);
    Diagram ka = make_atom("K", h, h);
    pc.d1 = make_seq(make_seq(make_seq(ga, ka), ka), ga);
    pc.d2 = make_feedback(1, 2, make_seq(make_tensor(ga, ka), make_perm({{2, 1}}, hh)));

    const Signature u{{{"U", n}}}, yf{{{"Yf", n}}}, e{{{"E", n}}}, y{{{"Y", n}}};
    Signature uyf = u;
    uyf.spaces.push_back(yf.spaces[0]);
    Signature yk_yo{{{"Yk", n}, {"Yo", n}}};
    Diagram sa = make_atom("S", uyf, e);
    Diagram g2 = make_atom("G", e, y);
    Diagram ca = make_atom("C", y, yk_yo);
    Diagram k2 = make_atom("K", Signature{{{"Yk", n}}}, yf);
    Diagram stage = make_tensor(k2, make_id(Signature{{{"Yo", n}}}));
    pc.cl = make_feedback(1, 2, make_seq(make_seq(make_seq(sa, g2), ca), stage));
    return pc;
}

}  // namespace snop
