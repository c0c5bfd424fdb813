#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snop/diagram.hpp"
#include "snop/environment.hpp"

namespace snop {

/// Deterministic splitmix/LCG-style generator used everywhere randomness is
/// needed outside the standard library's unspecified distributions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 1) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) / 9007199254740992.0; }
    /// Uniform integer in [0, n).
    int below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }
    /// Standard complex Gaussian (Box-Muller).
    cplx gaussian();

  private:
    std::uint64_t state_;
};

/// Random unitary whose order divides `order` (eigenvalues are order-th roots
/// of unity), so that powers of it realize a cyclic-group injection.
ComplexMatrix random_cyclic_unitary(Rng& rng, int dim, int order);

/// Cyclic control monoid Z/(m+1) over the given non-neutral token names, with
/// injections on the given spaces generated by random finite-order unitaries.
ControlMonoid random_cyclic_monoid(Rng& rng, const std::vector<std::string>& tokens,
                                   const std::vector<SpaceRef>& spaces);

/// Truncated counter monoid on k tokens u0..u_{k-1} with i + j saturating at
/// k-1, injected via powers of a nilpotent-plus-identity matrix.
ControlMonoid counter_monoid(Rng& rng, int k, const std::vector<SpaceRef>& spaces);

/// Random environment for a diagram: complex-Gaussian atoms, a cyclic monoid
/// covering every control token used, and all feedback loops rescaled (by
/// shrinking atoms) until every loop gain kappa <= 0.9. Throws if a loop's
/// gain cannot be influenced (e.g. a wire-only loop).
Environment random_environment(const Diagram& d, std::uint64_t seed);

}  // namespace snop
