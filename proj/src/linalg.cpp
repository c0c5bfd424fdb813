#include "snop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace snop {

namespace {

double off_diag_norm(const ComplexMatrix& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = 0; j < w.cols(); ++j)
            if (i != j) s += std::norm(w(i, j));
    return std::sqrt(s);
}

}  // namespace

EigenSystem eig_hermitian(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("eig_hermitian: matrix not square");
    const std::size_t n = a.rows();
    ComplexMatrix w = a;
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(1.0, w.max_abs());

    for (int sweep = 0; sweep < 120; ++sweep) {
        if (off_diag_norm(w) <= 1e-14 * scale * static_cast<double>(n)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = w(p, q);
                const double mag = std::abs(apq);
                if (mag <= 1e-300) continue;
                const cplx phi = apq / mag;
                const double alpha = w(p, p).real();
                const double beta = w(q, q).real();
                const double tau = (beta - alpha) / (2.0 * mag);
                double t;
                if (tau >= 0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // w <- w * U, v <- v * U
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx wp = w(k, p), wq = w(k, q);
                    w(k, p) = c * wp - s * std::conj(phi) * wq;
                    w(k, q) = s * phi * wp + c * wq;
                    const cplx vp = v(k, p), vq = v(k, q);
                    v(k, p) = c * vp - s * std::conj(phi) * vq;
                    v(k, q) = s * phi * vp + c * vq;
                }
                // w <- U^H * w
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx wp = w(p, k), wq = w(q, k);
                    w(p, k) = c * wp - s * phi * wq;
                    w(q, k) = s * std::conj(phi) * wp + c * wq;
                }
            }
        }
    }

    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = w(i, i).real();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return vals[x] < vals[y]; });

    EigenSystem out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = vals[order[j]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

NormReport op_norm(const ComplexMatrix& a, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("op_norm: tol must be positive");
    NormReport rep;
    if (a.rows() == 0 || a.cols() == 0) {
        rep.method = "svd";
        return rep;
    }
    if (std::max(a.rows(), a.cols()) <= 64) {
        // Gram-matrix route on the smaller side.
        ComplexMatrix g = (a.rows() < a.cols()) ? matmul(a, adjoint(a))
                                                : matmul(adjoint(a), a);
        EigenSystem es = eig_hermitian(g);
        rep.value = std::sqrt(std::max(0.0, es.values.back()));
        rep.method = "svd";
        return rep;
    }

    ComplexMatrix v(a.cols(), 1);
    for (std::size_t i = 0; i < a.cols(); ++i)
        v(i, 0) = 1.0 / std::sqrt(static_cast<double>(a.cols()));
    double lambda_prev = 0.0;
    const int max_iters = 10000;
    for (int it = 1; it <= max_iters; ++it) {
        ComplexMatrix w = matmul(a, v);
        double lambda = 0.0;
        for (std::size_t i = 0; i < w.rows(); ++i) lambda += std::norm(w(i, 0));
        ComplexMatrix u = matmul(adjoint(a), w);
        double un = u.frobenius();
        if (un == 0.0) {
            rep.method = "power-iteration";
            rep.iterations = it;
            return rep;  // value 0
        }
        v = scale(u, 1.0 / un);
        rep.iterations = it;
        rep.residual = std::abs(lambda - lambda_prev) / std::max(lambda, 1e-300);
        if (it > 1 && rep.residual <= tol) {
            rep.value = std::sqrt(lambda);
            rep.method = "power-iteration";
            return rep;
        }
        lambda_prev = lambda;
    }
    throw ConvergenceError("op_norm: power iteration did not converge");
}

double op_norm_value(const ComplexMatrix& a, double tol) { return op_norm(a, tol).value; }

double spectral_radius_estimate(const ComplexMatrix& a, int iters) {
    if (a.rows() != a.cols()) throw ShapeError("spectral_radius_estimate: not square");
    const std::size_t n = a.rows();
    if (n == 0) return 0.0;
    ComplexMatrix v(n, 1);
    // Fixed pseudo-random start so results are reproducible.
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    auto next = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) / static_cast<double>(1ull << 53) - 0.5;
    };
    for (std::size_t i = 0; i < n; ++i) v(i, 0) = cplx{1.0 + next(), next()};
    double vn = v.frobenius();
    v = scale(v, 1.0 / vn);
    double est = 0.0;
    for (int it = 0; it < iters; ++it) {
        ComplexMatrix w = matmul(a, v);
        double wn = w.frobenius();
        if (wn == 0.0) return 0.0;
        est = wn;  // ||A v|| with unit v converges to |lambda_max|
        v = scale(w, 1.0 / wn);
    }
    return est;
}

ComplexMatrix perm_unitary(const std::vector<int>& pi, const std::vector<int>& dims) {
    const std::size_t n = pi.size();
    if (dims.size() != n) throw ShapeError("perm_unitary: len(dims) != len(pi)");
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    std::vector<int> out_dims(n);
    for (std::size_t k = 0; k < n; ++k) out_dims[k] = dims[static_cast<std::size_t>(pi[k]) - 1];

    ComplexMatrix m(total, total);
    std::vector<int> idx(n, 0);
    for (std::size_t col = 0; col < total; ++col) {
        std::size_t row = 0;
        for (std::size_t k = 0; k < n; ++k)
            row = row * static_cast<std::size_t>(out_dims[k]) +
                  static_cast<std::size_t>(idx[static_cast<std::size_t>(pi[k]) - 1]);
        m(row, col) = 1.0;
        for (std::size_t k = n; k-- > 0;) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    return m;
}

namespace {

struct LUFactors {
    ComplexMatrix lu;
    std::vector<std::size_t> piv;
};

LUFactors lu_factor(const ComplexMatrix& a) {
    const std::size_t n = a.rows();
    LUFactors f{a, std::vector<std::size_t>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(f.lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(f.lu(i, k)) > best) { best = std::abs(f.lu(i, k)); p = i; }
        if (best < 1e-12) throw SingularMatrix("solve: pivot below threshold");
        f.piv[k] = p;
        if (p != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
        for (std::size_t i = k + 1; i < n; ++i) {
            f.lu(i, k) /= f.lu(k, k);
            const cplx lik = f.lu(i, k);
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
        }
    }
    return f;
}

ComplexMatrix lu_solve(const LUFactors& f, const ComplexMatrix& b) {
    const std::size_t n = f.lu.rows();
    ComplexMatrix x = b;
    for (std::size_t k = 0; k < n; ++k)
        if (f.piv[k] != k)
            for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(f.piv[k], j));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f.lu(i, k) * x(k, j);
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = 0; j < x.cols(); ++j) x(k, j) /= f.lu(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f.lu(i, k) * x(k, j);
    }
    return x;
}

}  // namespace

ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != a.cols()) throw ShapeError("solve: matrix not square");
    if (a.rows() != b.rows()) throw ShapeError("solve: rhs row mismatch");
    if (a.rows() == 0) return b;
    LUFactors f = lu_factor(a);
    ComplexMatrix x = lu_solve(f, b);
    // One step of iterative refinement.
    ComplexMatrix r = sub(b, matmul(a, x));
    x = add(x, lu_solve(f, r));
    return x;
}

CurriedMap curry(const ComplexMatrix& t, const std::vector<int>& in_dims, int split) {
    std::size_t total = 1;
    for (int d : in_dims) total *= static_cast<std::size_t>(d);
    if (total != t.cols()) throw ShapeError("curry: product of in_dims != cols");
    if (split < 1 || static_cast<std::size_t>(split) >= in_dims.size())
        throw ShapeError("curry: split out of range");
    return CurriedMap{t, in_dims, split};
}

ComplexMatrix uncurry(const CurriedMap& c) { return c.flat; }

namespace {

// B[r, a] = sum over multi-indices with idx[slot] = a of
//           t[r, flat] * prod_{j != slot} xs[j][idx[j]]
ComplexMatrix contract_all_but(const ComplexMatrix& t, const std::vector<int>& dims,
                               const std::vector<std::vector<cplx>>& xs, std::size_t slot) {
    const std::size_t n = dims.size();
    ComplexMatrix b(t.rows(), static_cast<std::size_t>(dims[slot]));
    std::vector<int> idx(n, 0);
    for (std::size_t flat = 0; flat < t.cols(); ++flat) {
        cplx coeff = 1.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != slot) coeff *= xs[j][static_cast<std::size_t>(idx[j])];
        if (coeff != cplx{0.0, 0.0}) {
            const std::size_t a = static_cast<std::size_t>(idx[slot]);
            for (std::size_t r = 0; r < t.rows(); ++r) b(r, a) += t(r, flat) * coeff;
        }
        for (std::size_t k = n; k-- > 0;) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    return b;
}

}  // namespace

NormReport multilinear_norm(const ComplexMatrix& t, const std::vector<int>& in_dims,
                            double tol) {
    std::size_t total = 1;
    for (int d : in_dims) total *= static_cast<std::size_t>(d);
    if (total != t.cols()) throw ShapeError("multilinear_norm: product of in_dims != cols");
    const std::size_t n = in_dims.size();
    if (n == 1) {
        NormReport rep = op_norm(t, std::min(tol, 1e-10));
        rep.method = "power-iteration";
        return rep;
    }

    NormReport best;
    best.method = "power-iteration";
    std::uint64_t state = 0x2545f4914f6cdd1dull;
    auto next = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) / static_cast<double>(1ull << 52) - 1.0;
    };

    for (int seed = 0; seed < 8; ++seed) {
        std::vector<std::vector<cplx>> xs(n);
        for (std::size_t j = 0; j < n; ++j) {
            xs[j].resize(static_cast<std::size_t>(in_dims[j]));
            double norm2 = 0.0;
            for (auto& z : xs[j]) {
                z = cplx{next(), next()};
                norm2 += std::norm(z);
            }
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& z : xs[j]) z *= inv;
        }

        double val = 0.0, prev = -1.0;
        int sweeps = 0;
        for (; sweeps < 80; ++sweeps) {
            for (std::size_t k = 0; k < n; ++k) {
                ComplexMatrix b = contract_all_but(t, in_dims, xs, k);
                EigenSystem es = eig_hermitian(matmul(adjoint(b), b));
                const std::size_t top = es.values.size() - 1;
                val = std::sqrt(std::max(0.0, es.values[top]));
                for (std::size_t i = 0; i < xs[k].size(); ++i)
                    xs[k][i] = es.vectors(i, top);
            }
            if (prev >= 0.0 && std::abs(val - prev) <= tol * std::max(1.0, val)) break;
            prev = val;
        }
        if (val > best.value) {
            best.value = val;
            best.iterations = sweeps;
            best.residual = (prev >= 0.0) ? std::abs(val - prev) : 0.0;
        }
    }
    return best;
}

}  // namespace snop
