#pragma once

#include <vector>

#include "snop/diagram.hpp"
#include "snop/environment.hpp"
#include "snop/linalg.hpp"
#include "snop/matrix.hpp"

namespace snop {

class IllPosedFeedback : public std::runtime_error {
  public:
    explicit IllPosedFeedback(double kappa)
        : std::runtime_error("ill-posed feedback: loop gain kappa = " + std::to_string(kappa) +
                             " >= 1 in strict mode"),
          kappa_(kappa) {}
    double kappa() const { return kappa_; }

  private:
    double kappa_;
};

struct SingularLoop : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A diagram's value: a matrix of shape (out wire dim) x (in wire dim),
/// where a signature's wire dim is the sum of its port dims. Ports compose
/// as direct sums of wires, so feedback partitions into the four loop blocks.
struct OperatorValue {
    ComplexMatrix matrix;
    Signature in_sig;
    Signature out_sig;
};

struct FeedbackReport {
    double kappa = 0.0;                // op_norm of the loop block M_ff
    double spectral_radius = 0.0;      // power-iteration estimate for M_ff
    FeedbackMode mode = FeedbackMode::Strict;
    int neumann_terms = 0;             // strict mode only
    double truncation_bound = 0.0;     // strict mode only
    double loop_norm_actual = 0.0;     // ||M_yf (I - M_ff)^-1 M_fx|| when solvable
    double loop_norm_bound = 0.0;      // ||M_yf|| ||M_fx|| / (1 - kappa) when kappa < 1
    bool strict_ok = false;            // kappa < 1
    bool relaxed_ok = false;           // I - M_ff invertible (direct solve succeeded)
    // The four blocks, retained for the analysis suite.
    ComplexMatrix m_yx, m_yf, m_fx, m_ff;
};

struct EvalReport {
    std::vector<FeedbackReport> feedbacks;  // innermost-first order
};

/// The canonical representation: evaluate a diagram against an environment.
OperatorValue eval(const Diagram& d, const Environment& env, EvalReport* report = nullptr);

/// Close one feedback loop from its four blocks. Strict mode sums the Neumann
/// series (stopping when kappa^(N+1)/(1-kappa)*||M_fx|| < tol) and
/// cross-checks the direct solve; relaxed mode solves directly.
ComplexMatrix feedback_close(const ComplexMatrix& m_yx, const ComplexMatrix& m_yf,
                             const ComplexMatrix& m_fx, const ComplexMatrix& m_ff,
                             const EnvOptions& options, FeedbackReport& report);

/// The monoid action Phi(u) on a signature: block diagonal of per-component
/// injections of the resolved token.
OperatorValue control_action(const ControlExpr& u, const Signature& sig, const Environment& env);

/// For a diagram whose outermost feedback is its only one: returns
/// (actual, bound) = (||M_yf (I-M_ff)^-1 M_fx||, ||M_yf|| ||M_fx|| / (1-kappa)).
/// Throws IllPosedFeedback unless strict-well-posed; asserts actual <= bound + 1e-9.
std::pair<double, double> eval_norm_bound(const Diagram& d, const Environment& env);

}  // namespace snop
