#include "tns/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tns/parallel.hpp"

#ifndef TNS_VERSION
#define TNS_VERSION "unknown"
#endif

namespace tns {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version() { return TNS_VERSION; }

Discretization::Discretization(int n_cells)
    : mesh(std::make_shared<const PeriodicMesh>(build_torus_mesh(n_cells))),
      spaces(std::make_unique<FESpaces>(mesh)),
      ops(assemble_operators(*spaces)) {}

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::string spec_text(const RunSpec& spec) {
    std::ostringstream os;
    write_run_spec(spec, os);
    return os.str();
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector json_vector(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_run_files(const RunSpec& spec, const RunOutcome& out, const FESpaces& spaces) {
    const fs::path dir(spec.out_dir);
    fs::create_directories(dir);
    {
        auto os = open_out(dir / "summary.csv");
        write_summary_csv(out.trajectory, spaces, os);
    }
    {
        auto os = open_out(dir / "report.tsv");
        write_report_tsv(out.report, os);
    }
    {
        auto os = open_out(dir / "report.json");
        write_report_json(out.report, os);
    }
    {
        auto os = open_out(dir / "spec.ini");
        write_run_spec(spec, os);
    }
    {
        auto os = open_out(dir / "trajectory.json");
        write_trajectory(out.trajectory, spec, os);
    }
    json meta;
    meta["version"] = version();
    meta["spec"] = spec_text(spec);
    meta["wall_seconds"] = out.wall_seconds;
    meta["threads"] = num_threads();
    meta["completed"] = out.trajectory.completed;
    meta["failure"] = out.trajectory.failure;
    meta["summary_columns"] = kSummaryHeader;
    auto os = open_out(dir / "metadata.json");
    os << std::setw(2) << meta << '\n';
}

}  // namespace

void write_summary_csv(const DiscreteTrajectory& traj, const FESpaces& spaces, std::ostream& os) {
    const std::vector<double> res = energy_residuals(traj, spaces);
    os << kSummaryHeader << '\n' << std::setprecision(17);
    for (int m = 1; m <= traj.steps(); ++m) {
        os << traj.times[m] << ',' << spaces.velocity_l2(traj.velocity[m]) << ','
           << spaces.velocity_grad_l2(traj.midpoint(m)) << ',' << spaces.pressure_l2(traj.pressure[m - 1]) << ','
           << res[m - 1] << '\n';
    }
}

void write_trajectory(const DiscreteTrajectory& traj, const RunSpec& spec, std::ostream& os) {
    json j;
    j["format"] = "tns-trajectory-1";
    j["spec"] = spec_text(spec);
    j["n_cells"] = traj.n_cells;
    j["h"] = traj.h;
    j["times"] = traj.times;
    j["velocity"] = json::array();
    for (const auto& v : traj.velocity) j["velocity"].push_back(vector_json(v));
    j["pressure"] = json::array();
    for (const auto& p : traj.pressure) j["pressure"].push_back(vector_json(p));
    j["picard_iterations"] = traj.picard_iterations;
    j["linear_residuals"] = traj.linear_residuals;
    j["scheme_residuals"] = traj.scheme_residuals;
    j["completed"] = traj.completed;
    j["failure"] = traj.failure;
    os << j.dump() << '\n';
}

StoredRun read_trajectory(std::istream& is) {
    StoredRun out;
    try {
        const json j = json::parse(is);
        if (j.at("format") != "tns-trajectory-1") throw ConfigError("unsupported trajectory format");
        std::istringstream spec_in(j.at("spec").get<std::string>());
        out.spec = parse_run_spec(spec_in);
        DiscreteTrajectory& t = out.trajectory;
        t.config = out.spec.scheme;
        t.n_cells = j.at("n_cells").get<int>();
        t.h = j.at("h").get<double>();
        t.times = j.at("times").get<std::vector<double>>();
        for (const auto& v : j.at("velocity")) t.velocity.push_back(json_vector(v));
        for (const auto& p : j.at("pressure")) t.pressure.push_back(json_vector(p));
        t.picard_iterations = j.at("picard_iterations").get<std::vector<int>>();
        t.linear_residuals = j.at("linear_residuals").get<std::vector<double>>();
        t.scheme_residuals = j.at("scheme_residuals").get<std::vector<double>>();
        t.completed = j.at("completed").get<bool>();
        t.failure = j.at("failure").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed trajectory file: ") + e.what());
    }
    return out;
}

RunOutcome run_single(const RunSpec& spec, bool write_files, const RunOptions& options) {
    spec.validate();
    const auto start = std::chrono::steady_clock::now();
    const Discretization d(spec.n_cells);
    const Vector u0 = initial_state(*d.spaces, d.ops, spec.datum_field().as_fn());
    RunOutcome out;
    out.trajectory = run(spec.scheme, *d.spaces, d.ops, u0, options);
    DiagnosticsOptions dopt;
    dopt.cn_threshold = spec.cn_threshold;
    dopt.local_energy = spec.local_energy && out.trajectory.steps() > 0;
    if (out.trajectory.steps() > 0) out.report = compute_report(out.trajectory, *d.spaces, dopt);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (write_files) write_run_files(spec, out, *d.spaces);
    return out;
}

void write_study_csv(const StudyTable& table, std::ostream& os) {
    os << "n_cells,h,dt,N,completed,gap_l2,gap_identity_error,increment_sum,min_local_energy,max_pressure_ratio,"
          "max_divergence_ratio,cn_ratio,cn_ok,cnle_ok,cnab_ok,cnab_dt_over_h3,cnab_recursion_ok\n"
       << std::setprecision(17);
    for (const auto& r : table.rows)
        os << r.n_cells << ',' << r.h << ',' << r.dt << ',' << r.N << ',' << r.completed << ',' << r.gap_l2 << ','
           << r.gap_identity_error << ',' << r.increment_sum << ',' << r.min_local_energy << ',' << r.max_pressure_ratio << ','
           << r.max_divergence_ratio << ',' << r.coupling.cn_ratio << ',' << r.coupling.cn_ok << ','
           << r.coupling.cnle_ok << ',' << r.coupling.cnab_ok << ',' << r.coupling.cnab_dt_over_h3 << ','
           << r.cnab_recursion_ok << '\n';
}

StudyTable run_study(const StudySpec& spec, bool write_files) {
    spec.validate();
    StudyTable table;
    const fs::path root(spec.base.out_dir);
    auto flush = [&]() {
        if (!write_files) return;
        fs::create_directories(root);
        auto os = open_out(root / "study.csv");
        write_study_csv(table, os);
        json j;
        j["gap_strictly_decreasing"] = table.gap_strictly_decreasing;
        j["local_energy_eps_nonincreasing"] = table.local_energy_eps_nonincreasing;
        j["levels"] = table.rows.size();
        auto js = open_out(root / "study.json");
        js << std::setw(2) << j << '\n';
        auto ss = open_out(root / "study.ini");
        write_study_spec(spec, ss);
    };
    RunOptions options;
    options.keep_partial = spec.base.scheme.scheme == Scheme::CNAB;
    for (int n : spec.levels) {
        RunSpec level = spec.base;
        level.n_cells = n;
        level.scheme.N = spec.steps_for(mesh_size(build_torus_mesh(n)));
        level.out_dir = (root / ("level_" + std::to_string(n))).string();
        RunOutcome out;
        try {
            out = run_single(level, write_files, options);
        } catch (...) {
            flush();
            throw;
        }
        StudyRow row;
        row.n_cells = n;
        row.h = out.trajectory.h;
        row.dt = level.scheme.dt();
        row.N = level.scheme.N;
        row.completed = out.trajectory.completed;
        row.gap_l2 = out.report.gap_l2;
        row.gap_identity_error = out.report.gap_identity_error;
        row.increment_sum = out.report.increment_sum;
        row.min_local_energy = out.report.min_local_energy_residual;
        row.max_pressure_ratio = out.report.max_pressure_ratio;
        row.max_divergence_ratio = out.report.max_divergence_ratio;
        row.coupling = out.report.coupling;
        row.cnab_recursion_ok = !out.report.has_cnab || out.report.cnab.recursion_ok;
        table.rows.push_back(row);
    }
    table.gap_strictly_decreasing = true;
    table.local_energy_eps_nonincreasing = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        const auto& a = table.rows[i - 1];
        const auto& b = table.rows[i];
        if (!(b.gap_l2 < a.gap_l2)) table.gap_strictly_decreasing = false;
        if (std::max(0.0, -b.min_local_energy) > std::max(0.0, -a.min_local_energy))
            table.local_energy_eps_nonincreasing = false;
    }
    flush();
    return table;
}

namespace {

Vector random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> dist;
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

CheckResult check_le(std::string name, double value, double threshold) {
    return {std::move(name), value <= threshold, value, threshold};
}

}  // namespace

std::vector<CheckResult> run_checks() {
    std::vector<CheckResult> out;
    const double vol = std::pow(kTwoPi, 3);

    for (int n : {2, 3}) {
        const PeriodicMesh mesh = build_torus_mesh(n);
        double total = 0.0, min_vol = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
            total += mesh.tet_volume(t);
            min_vol = std::min(min_vol, mesh.tet_volume(t));
        }
        const bool counts = mesh.num_vertices() == static_cast<std::size_t>(n * n * n) &&
                            mesh.num_tets() == static_cast<std::size_t>(6 * n * n * n) && min_vol > 0.0;
        out.push_back({"mesh_counts_n" + std::to_string(n), counts, static_cast<double>(mesh.num_tets()), 0.0});
        out.push_back(check_le("mesh_volume_n" + std::to_string(n), std::abs(total / vol - 1.0), 1e-12));
    }

    const Discretization d(2);
    const FESpaces& s = *d.spaces;
    std::mt19937_64 rng(20240611);

    {
        Vector v = random_vector(rng, s.velocity_dim());
        s.remove_velocity_mean(v);
        const Vector pv = s.project_velocity(VectorSampler(
            [&](std::size_t e, std::size_t q, const Vec3&) { return s.velocity_value(v, e, q); }));
        out.push_back(check_le("projection_idempotence", s.velocity_l2(pv - v) / s.velocity_l2(v), 1e-10));
    }

    double skew1 = 0.0, skew2 = 0.0, skew3 = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Vector u = s.project_velocity(random_trig(1000 + 2 * i, 2).as_fn());
        const Vector v = s.project_velocity(random_trig(1001 + 2 * i, 2).as_fn());
        const Vector vdf = project_divergence_free(s, d.ops, v);
        const double hu = s.velocity_h1(u), hv = s.velocity_h1(v), hvdf = s.velocity_h1(vdf);
        skew1 = std::max(skew1, std::abs(b_case1(s, u, v, v)) / (hu * hv * hv));
        skew2 = std::max(skew2, std::abs(b_case2(s, u, v, v)) / (hu * hv * hv));
        skew3 = std::max(skew3, std::abs(b_case3(s, u, vdf, vdf)) / (hu * hvdf * hvdf));
    }
    out.push_back(check_le("skew_case1", skew1, 1e-10));
    out.push_back(check_le("skew_case2", skew2, 1e-10));
    out.push_back(check_le("skew_case3_divergence_free", skew3, 1e-10));

    {
        const Vector u1 = random_vector(rng, s.velocity_dim()), u2 = random_vector(rng, s.velocity_dim());
        const Vector v = random_vector(rng, s.velocity_dim()), w = random_vector(rng, s.velocity_dim());
        const double alpha = 0.37;
        double worst = 0.0;
        for (int c = 1; c <= 3; ++c) {
            const ConvectiveForm form(s, convective_case_from_int(c));
            const double lhs = form.evaluate(alpha * u1 + u2, v, w);
            const double rhs = alpha * form.evaluate(u1, v, w) + form.evaluate(u2, v, w);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1.0));
        }
        out.push_back(check_le("trilinearity_first_slot", worst, 1e-12));
    }

    {
        DiscreteTrajectory t;
        t.config.T = 1.0;
        t.config.N = 10;
        t.n_cells = 2;
        t.h = s.h();
        for (int m = 0; m <= 10; ++m) {
            t.times.push_back(m * 0.1);
            t.velocity.push_back(random_vector(rng, s.velocity_dim()));
            if (m > 0) t.pressure.push_back(random_vector(rng, s.pressure_dim()));
        }
        const InterpolantSet interp(t, s);
        const double gap = interp.gap_l2();
        const double expected = t.dt() / 12.0 * interp.increment_sum();
        out.push_back(check_le("gap_identity", std::abs(gap - expected) / expected, 1e-12));
    }

    {
        SchemeConfig cfg;
        cfg.N = 4;
        cfg.T = 0.4;
        const Vector u0 = initial_state(s, d.ops, tg_like().as_fn());
        double energy = 0.0, div = 0.0;
        for (int c = 1; c <= 3; ++c) {
            cfg.convective = convective_case_from_int(c);
            const DiscreteTrajectory t = run(cfg, s, d.ops, u0);
            const double scale = std::max(1.0, s.velocity_l2_sq(u0));
            for (double r : energy_residuals(t, s)) energy = std::max(energy, std::abs(r) / scale);
            for (double r : divergence_ratios(t, s)) div = std::max(div, r);
        }
        out.push_back(check_le("cn_energy_identity", energy, 10.0 * cfg.picard_tol));
        out.push_back(check_le("cn_divergence_free", div, 1e-9));
    }

    {
        SaddleSolver solver(s, d.ops);
        const SpMat F = 2.0 * d.ops.mass + 0.5 * d.ops.stiffness;
        solver.factorize(F);
        Vector u = random_vector(rng, s.velocity_dim());
        Vector p = random_vector(rng, s.pressure_dim());
        s.remove_velocity_mean(u);
        s.remove_pressure_mean(p);
        const SaddleSolution sol =
            solver.solve(F * u - d.ops.divergence.transpose() * p, d.ops.divergence * u, Vec3::Zero());
        const double err = std::max((sol.velocity - u).norm() / u.norm(), (sol.pressure - p).norm() / p.norm());
        out.push_back(check_le("saddle_consistency", err, 1e-10));
    }

    {
        const double c = inf_sup_constant(s);
        out.push_back({"inf_sup_positive", c > 0.0, c, 0.0});
    }
    return out;
}

DiagnosticsReport rerender_report(const std::string& dir) {
    const fs::path root(dir);
    std::ifstream in(root / "trajectory.json");
    if (!in) throw ConfigError("cannot open " + (root / "trajectory.json").string());
    const StoredRun stored = read_trajectory(in);
    const Discretization d(stored.trajectory.n_cells);
    DiagnosticsOptions opt;
    opt.cn_threshold = stored.spec.cn_threshold;
    opt.local_energy = stored.spec.local_energy;
    const DiagnosticsReport report = compute_report(stored.trajectory, *d.spaces, opt);
    {
        auto os = open_out(root / "report.tsv");
        write_report_tsv(report, os);
    }
    auto os = open_out(root / "report.json");
    write_report_json(report, os);
    return report;
}

}  // namespace tns
