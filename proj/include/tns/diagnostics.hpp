// Residuals, bounds and monitors evaluated on a completed trajectory.
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tns/interpolants.hpp"

namespace tns {

/// 1/2 (|u^m|^2 - |u^{m-1}|^2) + nu dt |grad u^{m,1/2}|^2 for m = 1..N.
[[nodiscard]] std::vector<double> energy_residuals(const DiscreteTrajectory& traj, const FESpaces& spaces);

/// 1/2 |v(T)|^2 + nu int_0^T |grad u(t)|^2 dt - 1/2 |u^0|^2.
[[nodiscard]] double global_energy_defect(const DiscreteTrajectory& traj, const FESpaces& spaces);

/// max over step pairs m1 < m2 of
/// 1/2 |u^{m2}|^2 + nu dt sum_{m1 < m <= m2} |grad u^{m,1/2}|^2 - 1/2 |u^{m1}|^2.
[[nodiscard]] double strong_energy_defect(const DiscreteTrajectory& traj, const FESpaces& spaces);

/// |p^m|_2 / (|w|_{H1} + |w|_3 |w|_{H1}) with w = u^{m,1/2}. A zero
/// denominator gives 0 when p^m = 0 and +inf otherwise.
[[nodiscard]] std::vector<double> pressure_ratios(const DiscreteTrajectory& traj, const FESpaces& spaces);

/// max_q |(div u^m, q)| / |q|_2 divided by |u^m|_{H1}, for m = 0..N.
[[nodiscard]] std::vector<double> divergence_ratios(const DiscreteTrajectory& traj, const FESpaces& spaces);

/// Nonnegative polynomial bump ((t - a)(b - t))^2, normalized to peak 1 and
/// zero outside [a, b].
struct TimeBump {
    double a = 0.0;
    double b = 1.0;
    [[nodiscard]] double operator()(double t) const;
    [[nodiscard]] double derivative(double t) const;
};

/// phi(x, t) = psi(x) eta(t).
struct SpaceTimeTest {
    std::string name;
    TrigPoly psi;
    TimeBump eta;
};

/// The 12 products of six positive spatial factors with two bumps.
[[nodiscard]] std::vector<SpaceTimeTest> local_energy_test_family(double T);

/// RHS - LHS of the local energy inequality with u, p replaced by the
/// piecewise-constant interpolants. Throws std::invalid_argument when phi is
/// negative at a quadrature point.
[[nodiscard]] double local_energy_residual(const DiscreteTrajectory& traj, const FESpaces& spaces,
                                           const SpaceTimeTest& phi);

struct CnabMonitor {
    std::vector<double> xi;  // xi^m for m = 1..N (index m - 1)
    bool recursion_ok = true;
    int first_violation = -1;  // step index m, or -1
    bool nonincreasing = true;
    double max_u_sq = 0.0;
    double increment_sum = 0.0;
    bool increment_bound_ok = true;  // increment_sum <= 32 max_u_sq
};

/// xi^m = |u^m|^2 + 1/4 |u^m - u^{m-1}|^2 and the check
/// (1 + dt / (2 c1^2)) xi^m <= xi^{m-1} for m >= 2. Throws for c1 <= 0.
[[nodiscard]] CnabMonitor cnab_monitor(const DiscreteTrajectory& traj, const FESpaces& spaces, double c1);

struct FirstStepCheck {
    double lhs = 0.0;  // 1/2 |u^1|^2 + nu dt / 4 |grad u^1|^2
    double rhs = 0.0;  // (1/2 + nu dt / (4 h^2)) |u^0|^2
    [[nodiscard]] double defect() const { return lhs - rhs; }
};

[[nodiscard]] FirstStepCheck cnab_first_step_check(const DiscreteTrajectory& traj, const FESpaces& spaces);

struct DiagnosticsReport {
    std::string scheme;
    int convective_case = 1;
    int n_cells = 0;
    double h = 0.0;
    double dt = 0.0;
    double nu = 0.0;
    double T = 0.0;
    int N = 0;

    std::vector<double> energy_residuals;
    double max_scaled_energy_residual = 0.0;  // |res_m| / max(1, |u^{m-1}|^2)
    double global_energy_defect = 0.0;
    double strong_energy_defect = 0.0;
    double increment_sum = 0.0;
    double increment_normalized = 0.0;  // increment_sum / (dt + h^{-1/2})
    double u0_l2 = 0.0;
    double u0_h1 = 0.0;
    double gap_l2 = 0.0;
    double gap_identity_error = 0.0;  // |gap - dt/12 increments| / max(gap, tiny)
    std::vector<double> pressure_ratios;
    double max_pressure_ratio = 0.0;
    std::vector<std::string> local_energy_names;
    std::vector<double> local_energy_residuals;
    double min_local_energy_residual = 0.0;
    std::vector<double> divergence_ratios;
    double max_divergence_ratio = 0.0;
    std::vector<int> picard_iterations;
    std::vector<double> scheme_residuals;
    CouplingFlags coupling;
    bool has_cnab = false;
    CnabMonitor cnab;
    FirstStepCheck first_step;
};

struct DiagnosticsOptions {
    double cn_threshold = 1.0;
    bool local_energy = true;
};

[[nodiscard]] DiagnosticsReport compute_report(const DiscreteTrajectory& traj, const FESpaces& spaces,
                                               const DiagnosticsOptions& options = {});

/// One "name<TAB>value" line per scalar metric.
void write_report_tsv(const DiagnosticsReport& r, std::ostream& os);
/// Structured document with the scalar metrics and per-step arrays.
void write_report_json(const DiagnosticsReport& r, std::ostream& os);

}  // namespace tns
