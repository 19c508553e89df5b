// Crank-Nicolson (CN), CN with linear extrapolation (CNLE) and
// CN / Adams-Bashforth (CNAB) time stepping on the MINI pair.
//
// Every scheme solves for the midpoint w = (u^m + u^{m-1}) / 2:
//   (2/dt) M w + nu A w + N w - B^T p = (2/dt) M u^{m-1} - e
//   B w = B u^{m-1} / 2,   C w = C u^{m-1} / 2
// and sets u^m = 2 w - u^{m-1}. N is b_h(w, ., .) iterated (CN), b_h frozen at
// the extrapolated field (CNLE), or zero with the explicit e (CNAB).
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tns/linsolve.hpp"

namespace tns {

enum class Scheme { CN, CNLE, CNAB };

[[nodiscard]] std::string to_string(Scheme s);
[[nodiscard]] Scheme scheme_from_string(const std::string& s);

struct SchemeConfig {
    Scheme scheme = Scheme::CN;
    ConvectiveCase convective = ConvectiveCase::Symmetrized;
    double nu = 0.1;
    double T = 1.0;
    int N = 16;
    double picard_tol = 1e-10;
    int picard_max_iters = 50;
    double c1 = 1.0;
    double C_cnle = 1.0;

    [[nodiscard]] double dt() const { return T / N; }
    /// Throws std::invalid_argument on non-positive nu, T, N or tolerances.
    void validate() const;
};

struct StepResult {
    Vector u;
    Vector p;
    int picard_iterations = 0;
    double linear_residual = 0.0;
    /// Euclidean norm of the full scheme residual tested against every basis
    /// function, after the last solve.
    double scheme_residual = 0.0;
    std::vector<double> increment_history;
};

struct DiscreteTrajectory {
    SchemeConfig config;
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> times;     // t_0 .. t_N
    std::vector<Vector> velocity;  // u^0 .. u^N
    std::vector<Vector> pressure;  // pressure[m - 1] = p^m
    std::vector<int> picard_iterations;
    std::vector<double> linear_residuals;
    std::vector<double> scheme_residuals;
    /// False when the run stopped early (see RunOptions); failure holds the
    /// reason and velocity holds the states reached.
    bool completed = true;
    std::string failure;

    [[nodiscard]] int steps() const { return static_cast<int>(velocity.size()) - 1; }
    [[nodiscard]] double dt() const { return config.dt(); }
    [[nodiscard]] Vector midpoint(int m) const { return 0.5 * (velocity[m] + velocity[m - 1]); }
};

/// Step-level driver holding the operators of one discretization.
class Stepper {
public:
    Stepper(const FESpaces& spaces, const AssembledOperators& ops, SchemeConfig config);

    [[nodiscard]] const SchemeConfig& config() const { return config_; }
    [[nodiscard]] const ConvectiveForm& form() const { return form_; }

    /// One CN step; throws SolverError when Picard does not converge.
    [[nodiscard]] StepResult step_cn(const Vector& u_prev);
    [[nodiscard]] StepResult step_cnle(const Vector& u_prev, const Vector& u_prev2);
    [[nodiscard]] StepResult step_cnab(const Vector& u_prev, const Vector& u_prev2);

    /// Scheme residual for a candidate midpoint w with advecting field a and
    /// explicit term e (may be empty).
    [[nodiscard]] Vector residual(const Vector& u_prev, const Vector& w, const Vector& p, const Vector& a,
                                  const Vector& explicit_term) const;

private:
    [[nodiscard]] SpMat base_matrix() const;
    [[nodiscard]] StepResult solve_linear(const Vector& u_prev, const Vector* advecting, const Vector& explicit_term,
                                          SaddleSolver& solver, bool refactor);
    [[nodiscard]] StepResult finish(const Vector& u_prev, SaddleSolution sol, const Vector* advecting,
                                    const Vector& explicit_term) const;

    const FESpaces* spaces_;
    const AssembledOperators* ops_;
    SchemeConfig config_;
    ConvectiveForm form_;
    SpMat base_;
    SaddleSolver work_solver_;
    SaddleSolver fixed_solver_;
};

/// u^0: L2 projection of the datum onto the discretely divergence-free
/// subspace V_h.
[[nodiscard]] Vector initial_state(const FESpaces& spaces, const AssembledOperators& ops, const VectorFn& u0);

struct RunOptions {
    /// Return the states computed before a solver failure instead of throwing.
    bool keep_partial = false;
};

/// Full trajectory; CNLE and CNAB take one CN step first. Errors are rethrown
/// as SolverError carrying the step index.
[[nodiscard]] DiscreteTrajectory run(const SchemeConfig& config, const FESpaces& spaces,
                                     const AssembledOperators& ops, const Vector& u0,
                                     const RunOptions& options = {});

struct CouplingFlags {
    double cn_ratio = 0.0;  // dt |u0|^3 / (nu h^{1/2})
    double cn_threshold = 1.0;
    bool cn_ok = false;
    double cnle_bound = 0.0;  // (nu/16) min{h^2, h^3 |u0|^2 / (4 C^2)}
    bool cnle_ok = false;
    double cnab_bound = 0.0;  // 4 c1^2 / nu
    bool cnab_ok = false;
    double cnab_dt_over_h3 = 0.0;
};

[[nodiscard]] CouplingFlags check_coupling(const SchemeConfig& config, double h, double u0_norm,
                                           double cn_threshold = 1.0);

}  // namespace tns
