#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "snop/diagram.hpp"
#include "snop/environment.hpp"
#include "snop/semantics.hpp"

namespace snop {

struct AmbiguousCrossing : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One FeedbackReport per feedback loop, innermost first. Never throws:
/// loops are probed in relaxed mode; strict_ok / relaxed_ok carry the
/// verdicts, and loops unreachable past a singular inner loop are omitted.
std::vector<FeedbackReport> well_posedness(const Diagram& d, const Environment& env);

struct LipschitzReport {
    double alpha = 0.0;               // contraction constant of the loop block
    double L = 0.0;                   // Lipschitz estimate of t -> inject(t)
    double predicted_bound = 0.0;     // L / (1 - alpha)
    double empirical_max_ratio = 0.0; // max ||eval(t1)-eval(t2)|| / |t1-t2|
    bool divergent = false;           // L keeps growing under grid refinement
};

/// Probe the feedback-continuity bound on a one-parameter control family.
/// env_at(t) supplies the environment with the family member bound;
/// inject_at(t) is the member itself (for the L estimate); grid is the
/// sampled parameter values (ascending).
LipschitzReport control_lipschitz(const Diagram& d,
                                  const std::function<Environment(double)>& env_at,
                                  const std::function<ComplexMatrix(double)>& inject_at,
                                  const std::vector<double>& grid);

struct DerivativeReport {
    ComplexMatrix derivative;      // central difference at step h/2
    double error_estimate = 0.0;   // ||D_h - D_{h/2}|| (Richardson check)
    double h = 0.0;
};

DerivativeReport control_derivative(const Diagram& d,
                                    const std::function<Environment(double)>& env_at, double t0,
                                    double h);

struct Crossing {
    double t = 0.0;
    int direction = 0;  // +1 upward through zero, -1 downward
};

struct SpectralFlowReport {
    std::vector<Crossing> crossings;
    int sf = 0;
    bool kernel_dim_ok = true;            // kernel dimension <= 1 at every sample
    std::optional<bool> orientable;       // holonomy sign, when the kernel is a
                                          // line bundle over the whole loop
};

/// Signed count of eigenvalue zero-crossings along a Hermitian path; samples
/// are placed at t = k/(m-1). Throws AmbiguousCrossing when a near-zero
/// eigenvalue cannot be resolved from its neighbors.
SpectralFlowReport spectral_flow(const std::vector<ComplexMatrix>& path, bool is_loop);

// Constructed spectral-flow paths (acceptance fixtures).
std::vector<ComplexMatrix> sf_path_upward(int samples);           // sf = +1
std::vector<ComplexMatrix> sf_loop_constant_gap(int samples);     // sf = 0, no kernel
/// Moebius kernel bundle: kernel line rotates by pi over the loop, so the
/// bundle is nonorientable; all eigenvalues are constant, so sf = 0.
std::vector<ComplexMatrix> sf_loop_nonorientable(int samples);
/// Randomized loop with a 1-dimensional kernel bundle of even winding
/// (orientable, sf = 0), conjugated by a seeded random unitary.
std::vector<ComplexMatrix> sf_random_parity_loop(std::uint64_t seed, int samples);

struct PdeCase {
    Environment env;       // atoms S, G, C, K bound; relaxed feedback mode
    Diagram d1;            // G then K then K then G
    Diagram d2;            // feedback[1,2]((G * K) then perm[2,1])
    Diagram cl;            // closed loop y = G(u - K y)
    ComplexMatrix g;       // scaled inverse Dirichlet Laplacian, ||G|| = gain
    ComplexMatrix k;       // projector onto the lower half of the spectrum
};

/// Discretized boundary-control demo on the 1-D Dirichlet Laplacian.
PdeCase build_pde_case(int n, double gain);

}  // namespace snop
