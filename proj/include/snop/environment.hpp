#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snop/diagram.hpp"
#include "snop/matrix.hpp"

namespace snop {

struct EnvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundAtom : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundToken : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FeedbackMode { Strict, Relaxed };

struct EnvOptions {
    FeedbackMode feedback_mode = FeedbackMode::Strict;
    double tol = 1e-12;
};

/// Finite control monoid with per-space injection matrices. All laws
/// (associativity, neutrality, involution, injection homomorphism) are
/// verified by validate(), which load_environment always calls.
struct ControlMonoid {
    std::vector<std::string> tokens;
    std::string neutral;
    std::map<std::pair<std::string, std::string>, std::string> star;  // (a,b) -> a ⋆ b
    std::map<std::string, std::string> involution;                    // empty => none
    std::map<std::pair<std::string, std::string>, ComplexMatrix> inject;  // (token, space)

    bool has_involution() const { return !involution.empty(); }

    const std::string& star_of(const std::string& a, const std::string& b) const;
    const std::string& involute(const std::string& a) const;

    /// Fold a normalized control word to a single token (empty word => neutral).
    std::string resolve_word(const std::vector<CtrlLetter>& word) const;

    /// Injection matrix of a token on one space; the neutral token defaults to
    /// the identity when no explicit entry exists.
    ComplexMatrix inject_of(const std::string& token, const SpaceRef& space) const;

    /// Check all monoid and injection laws; throws EnvError on violation.
    void validate(double tol = 1e-12) const;
};

struct Environment {
    std::map<std::string, ComplexMatrix> atoms;
    std::optional<ControlMonoid> monoid;
    EnvOptions options;

    const ComplexMatrix& atom(const std::string& name) const;
    const ControlMonoid& require_monoid() const;
};

ComplexMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const ComplexMatrix& m);

/// Parse and eagerly validate an environment (hard errors, no coercion).
Environment load_environment(const nlohmann::json& j);
Environment load_environment_file(const std::string& path);

}  // namespace snop
