// Run orchestration: single runs, refinement studies, the self-check suite and
// re-rendering reports from stored trajectories.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tns/config.hpp"
#include "tns/diagnostics.hpp"

namespace tns {

[[nodiscard]] std::string version();

/// A spec together with the discretization it defines.
struct Discretization {
    std::shared_ptr<const PeriodicMesh> mesh;
    std::unique_ptr<FESpaces> spaces;
    AssembledOperators ops;

    explicit Discretization(int n_cells);
};

struct RunOutcome {
    DiscreteTrajectory trajectory;
    DiagnosticsReport report;
    double wall_seconds = 0.0;
};

/// Summary CSV columns, in order.
inline constexpr const char* kSummaryHeader = "t,u_l2,grad_mid_l2,p_l2,energy_residual";

/// One row per step m = 1..N, 17 significant digits.
void write_summary_csv(const DiscreteTrajectory& traj, const FESpaces& spaces, std::ostream& os);

void write_trajectory(const DiscreteTrajectory& traj, const RunSpec& spec, std::ostream& os);
struct StoredRun {
    RunSpec spec;
    DiscreteTrajectory trajectory;
};
[[nodiscard]] StoredRun read_trajectory(std::istream& is);

/// Runs the spec. With write_files, spec.out_dir receives summary.csv,
/// report.tsv, report.json, metadata.json, spec.ini and trajectory.json.
[[nodiscard]] RunOutcome run_single(const RunSpec& spec, bool write_files = true,
                                    const RunOptions& options = {});

struct StudyRow {
    int n_cells = 0;
    double h = 0.0;
    double dt = 0.0;
    int N = 0;
    bool completed = true;
    double gap_l2 = 0.0;
    double gap_identity_error = 0.0;
    double increment_sum = 0.0;
    double min_local_energy = 0.0;
    double max_pressure_ratio = 0.0;
    double max_divergence_ratio = 0.0;
    CouplingFlags coupling;
    bool cnab_recursion_ok = true;
};

struct StudyTable {
    std::vector<StudyRow> rows;
    bool gap_strictly_decreasing = false;
    /// eps_level = max(0, -min local energy residual), nonincreasing.
    bool local_energy_eps_nonincreasing = false;
};

/// One run per level with N = steps_for(h). CNAB levels that break down are
/// recorded; other solver failures abort after the partial table is written.
[[nodiscard]] StudyTable run_study(const StudySpec& spec, bool write_files = true);
void write_study_csv(const StudyTable& table, std::ostream& os);

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
};

/// Structural identities of every module on small meshes.
[[nodiscard]] std::vector<CheckResult> run_checks();

/// Recomputes the diagnostics of the trajectory.json stored in dir and
/// rewrites report.tsv and report.json there.
[[nodiscard]] DiagnosticsReport rerender_report(const std::string& dir);

}  // namespace tns
