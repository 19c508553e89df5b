// tns_cli: run, study, check and report front end.
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tns/driver.hpp"
#include "tns/parallel.hpp"

namespace {

enum Exit { kOk = 0, kConfigError = 1, kSolverError = 2, kCheckFailed = 3 };

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

tns::RunSpec load_run(const Overrides& o) {
    tns::RunSpec spec = o.config.empty() ? tns::RunSpec{} : tns::load_run_spec(o.config);
    if (!o.out.empty()) spec.out_dir = o.out;
    if (o.seed) spec.seed = *o.seed;
    spec.validate();
    return spec;
}

void print_report(const tns::DiagnosticsReport& r) {
    std::cout << std::setprecision(6) << r.scheme << " case " << r.convective_case << " n_cells=" << r.n_cells
              << " N=" << r.N << " dt=" << r.dt << '\n'
              << "  max scaled energy residual " << r.max_scaled_energy_residual << '\n'
              << "  global energy defect       " << r.global_energy_defect << '\n'
              << "  gap_l2                     " << r.gap_l2 << '\n'
              << "  gap identity error         " << r.gap_identity_error << '\n'
              << "  max pressure ratio         " << r.max_pressure_ratio << '\n'
              << "  min local energy residual  " << r.min_local_energy_residual << '\n'
              << "  max divergence ratio       " << r.max_divergence_ratio << '\n';
    if (r.has_cnab)
        std::cout << "  cnab recursion ok          " << (r.cnab.recursion_ok ? "yes" : "no") << '\n';
}

int run_cmd(const Overrides& o) {
    const tns::RunSpec spec = load_run(o);
    const tns::RunOutcome out = tns::run_single(spec);
    print_report(out.report);
    std::cout << "wrote " << spec.out_dir << " (" << std::setprecision(3) << out.wall_seconds << " s)\n";
    return kOk;
}

int study_cmd(const Overrides& o, const std::vector<int>& levels, std::optional<double> alpha) {
    tns::StudySpec spec = o.config.empty() ? tns::StudySpec{} : tns::load_study_spec(o.config);
    if (!o.out.empty()) spec.base.out_dir = o.out;
    if (o.seed) spec.base.seed = *o.seed;
    if (!levels.empty()) spec.levels = levels;
    if (alpha) spec.alpha = *alpha;
    spec.validate();
    const tns::StudyTable table = tns::run_study(spec);
    tns::write_study_csv(table, std::cout);
    std::cout << "gap_l2 strictly decreasing: " << (table.gap_strictly_decreasing ? "yes" : "no") << '\n'
              << "local energy eps nonincreasing: " << (table.local_energy_eps_nonincreasing ? "yes" : "no")
              << '\n';
    return kOk;
}

int check_cmd() {
    bool ok = true;
    for (const auto& c : tns::run_checks()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(30) << c.name << ' '
                  << std::setprecision(3) << c.value << " (threshold " << c.threshold << ")\n";
        ok = ok && c.passed;
    }
    return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite element Navier-Stokes solver on the periodic torus"};
    app.set_version_flag("--version", tns::version());
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (overrides TNS_THREADS)")->check(CLI::PositiveNumber);

    Overrides o;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Spec file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", seed, "Seed for the random-trig datum");
        sub->add_option("--threads", threads, "Worker threads (overrides TNS_THREADS)")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "Run one spec");
    add_common(run);
    auto* study = app.add_subcommand("study", "Refinement study over mesh levels");
    add_common(study);
    std::vector<int> levels;
    double alpha = 0.0;
    study->add_option("--levels", levels, "Comma-separated n_cells values")->delimiter(',');
    study->add_option("--alpha", alpha, "Coupling exponent, dt = C h^alpha");
    auto* check = app.add_subcommand("check", "Run the self-check suite");
    check->add_option("--threads", threads, "Worker threads (overrides TNS_THREADS)")->check(CLI::PositiveNumber);
    auto* report = app.add_subcommand("report", "Recompute diagnostics from a stored run directory");
    std::string report_dir;
    report->add_option("dir", report_dir, "Run directory holding trajectory.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }
    if (threads > 0) tns::set_num_threads(threads);
    if (run->count("--seed") || study->count("--seed")) o.seed = seed;

    try {
        if (*run) return run_cmd(o);
        if (*study) return study_cmd(o, levels, study->count("--alpha") ? std::optional<double>(alpha) : std::nullopt);
        if (*check) return check_cmd();
        print_report(tns::rerender_report(report_dir));
        return kOk;
    } catch (const tns::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const tns::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolverError;
    }
}
