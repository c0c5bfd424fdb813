#pragma once

#include <string>
#include <vector>

#include "snop/matrix.hpp"

namespace snop {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NormReport {
    double value = 0.0;
    std::string method;  // "svd" or "power-iteration"
    int iterations = 0;
    double residual = 0.0;
};

/// Hermitian eigendecomposition, a = v * diag(values) * v^H, values ascending.
struct EigenSystem {
    std::vector<double> values;
    ComplexMatrix vectors;  // columns are eigenvectors, unitary
};

/// Complex Jacobi iteration; a must be Hermitian.
EigenSystem eig_hermitian(const ComplexMatrix& a);

/// Largest singular value. Deterministic: power iteration started from the
/// normalized all-ones vector; for dims <= 64 a full decomposition of a^H a
/// is used instead ("svd" method).
NormReport op_norm(const ComplexMatrix& a, double tol = 1e-12);

/// Shorthand for op_norm(a).value.
double op_norm_value(const ComplexMatrix& a, double tol = 1e-12);

/// Spectral radius estimate by plain power iteration (non-Hermitian allowed).
double spectral_radius_estimate(const ComplexMatrix& a, int iters = 300);

/// Unitary permutation of tensor factors: basis vector indexed (i_1,..,i_n)
/// over dims goes to the slot it occupies in the permuted factor order.
/// pi is 1-based, pi[k-1] = pi(k).
ComplexMatrix perm_unitary(const std::vector<int>& pi, const std::vector<int>& dims);

/// Solve a x = b by partially pivoted elimination with one refinement step.
ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b);

/// Curried view of a multilinear map: pure index reshape, no data movement.
struct CurriedMap {
    ComplexMatrix flat;
    std::vector<int> in_dims;
    int split = 1;  // 1 <= split < in_dims.size(); first `split` slots are outer
};

CurriedMap curry(const ComplexMatrix& t, const std::vector<int>& in_dims, int split);
ComplexMatrix uncurry(const CurriedMap& c);

/// Heuristic lower bound on sup ||T(x_1 (x) ... (x) x_n)|| over product unit
/// vectors, by alternating power iteration restarted from 8 deterministic
/// seeds; the max over restarts is reported.
NormReport multilinear_norm(const ComplexMatrix& t, const std::vector<int>& in_dims,
                            double tol = 1e-9);

}  // namespace snop
