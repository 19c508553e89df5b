#include "tns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "assembly.hpp"

namespace tns {

namespace {

struct StepEnergy {
    std::vector<double> l2_sq;       // |u^m|^2, m = 0..N
    std::vector<double> mid_grad_sq;  // |grad u^{m,1/2}|^2, index m - 1
};

StepEnergy step_energies(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    StepEnergy out;
    for (const auto& u : traj.velocity) out.l2_sq.push_back(spaces.velocity_l2_sq(u));
    for (int m = 1; m <= traj.steps(); ++m) out.mid_grad_sq.push_back(spaces.velocity_grad_l2_sq(traj.midpoint(m)));
    return out;
}

constexpr double kGaussNodes[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGaussWeights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

}  // namespace

std::vector<double> energy_residuals(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    const StepEnergy e = step_energies(traj, spaces);
    const double nu_dt = traj.config.nu * traj.dt();
    std::vector<double> out;
    for (int m = 1; m <= traj.steps(); ++m)
        out.push_back(0.5 * (e.l2_sq[m] - e.l2_sq[m - 1]) + nu_dt * e.mid_grad_sq[m - 1]);
    return out;
}

double global_energy_defect(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    const StepEnergy e = step_energies(traj, spaces);
    double dissipation = 0.0;
    for (double g : e.mid_grad_sq) dissipation += g;
    return 0.5 * e.l2_sq.back() + traj.config.nu * traj.dt() * dissipation - 0.5 * e.l2_sq.front();
}

double strong_energy_defect(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    const StepEnergy e = step_energies(traj, spaces);
    const double nu_dt = traj.config.nu * traj.dt();
    const int N = traj.steps();
    double worst = -std::numeric_limits<double>::infinity();
    for (int m1 = 0; m1 < N; ++m1) {
        double diss = 0.0;
        for (int m2 = m1 + 1; m2 <= N; ++m2) {
            diss += nu_dt * e.mid_grad_sq[m2 - 1];
            worst = std::max(worst, 0.5 * e.l2_sq[m2] + diss - 0.5 * e.l2_sq[m1]);
        }
    }
    return worst;
}

std::vector<double> pressure_ratios(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    std::vector<double> out;
    for (int m = 1; m <= traj.steps(); ++m) {
        const Vector w = traj.midpoint(m);
        const double h1 = spaces.velocity_h1(w);
        const double denom = h1 + spaces.velocity_lp(w, 3.0) * h1;
        const double pn = spaces.pressure_l2(traj.pressure[m - 1]);
        if (denom > 0.0)
            out.push_back(pn / denom);
        else
            out.push_back(pn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    }
    return out;
}

std::vector<double> divergence_ratios(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    std::vector<double> out;
    for (const auto& u : traj.velocity) {
        const double h1 = spaces.velocity_h1(u);
        const double d = spaces.divergence_dual_norm(u);
        out.push_back(h1 > 0.0 ? d / h1 : (d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()));
    }
    return out;
}

double TimeBump::operator()(double t) const {
    if (t <= a || t >= b) return 0.0;
    const double half = 0.5 * (b - a);
    const double g = (t - a) * (b - t) / (half * half);
    return g * g;
}

double TimeBump::derivative(double t) const {
    if (t <= a || t >= b) return 0.0;
    const double half = 0.5 * (b - a);
    const double g = (t - a) * (b - t) / (half * half);
    const double dg = (a + b - 2.0 * t) / (half * half);
    return 2.0 * g * dg;
}

std::vector<SpaceTimeTest> local_energy_test_family(double T) {
    const TrigPoly one = TrigPoly::constant(1.0);
    auto bump1 = [&](int axis) {
        std::array<int, 3> k{0, 0, 0};
        k[axis] = 1;
        return one + TrigPoly::term(0.5, k, {"cos", "cos", "cos"});
    };
    auto product = [&](int i, int j) {
        std::array<int, 3> ki{0, 0, 0}, kj{0, 0, 0}, kij{0, 0, 0};
        ki[i] = 1;
        kj[j] = 1;
        kij[i] = 1;
        kij[j] = 1;
        return one + TrigPoly::term(0.5, ki, {"cos", "cos", "cos"}) + TrigPoly::term(0.5, kj, {"cos", "cos", "cos"}) +
               TrigPoly::term(0.25, kij, {"cos", "cos", "cos"});
    };
    const std::vector<std::pair<std::string, TrigPoly>> spatial = {
        {"1", one},           {"1+cosx/2", bump1(0)},     {"1+cosy/2", bump1(1)},
        {"1+cosz/2", bump1(2)}, {"(1+cosx/2)(1+cosy/2)", product(0, 1)}, {"(1+cosy/2)(1+cosz/2)", product(1, 2)}};
    const std::vector<std::pair<std::string, TimeBump>> temporal = {{"wide", {T / 8.0, 7.0 * T / 8.0}},
                                                                    {"narrow", {T / 4.0, 3.0 * T / 4.0}}};
    std::vector<SpaceTimeTest> out;
    for (const auto& [tn, eta] : temporal)
        for (const auto& [sn, psi] : spatial) out.push_back({sn + "*" + tn, psi, eta});
    return out;
}

double local_energy_residual(const DiscreteTrajectory& traj, const FESpaces& spaces, const SpaceTimeTest& phi) {
    const std::size_t nq = spaces.num_qp();
    const double nu = traj.config.nu;
    // psi and its derivatives at every quadrature point, checked for sign.
    const std::size_t ne = spaces.num_elements();
    std::vector<double> psi(ne * nq), lap(ne * nq);
    std::vector<Vec3> grad(ne * nq);
    parallel_for(ne, [&](std::size_t e) {
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3 x = spaces.point(e, q);
            psi[e * nq + q] = phi.psi(x);
            grad[e * nq + q] = phi.psi.gradient(x);
            lap[e * nq + q] = phi.psi.laplacian(x);
        }
    });
    for (double v : psi)
        if (v < 0.0) throw std::invalid_argument("local energy test function is negative at a quadrature point");

    double total = 0.0;
    for (int m = 1; m <= traj.steps(); ++m) {
        const double t0 = std::max(traj.times[m - 1], phi.eta.a);
        const double t1 = std::min(traj.times[m], phi.eta.b);
        if (!(t1 > t0)) continue;
        double eta_int = 0.0, deta_int = 0.0;
        for (int g = 0; g < 3; ++g) {
            const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * kGaussNodes[g];
            const double w = 0.5 * (t1 - t0) * kGaussWeights[g];
            const double eta = phi.eta(t);
            if (eta < 0.0) throw std::invalid_argument("local energy time bump is negative");
            eta_int += w * eta;
            deta_int += w * phi.eta.derivative(t);
        }
        const Vector w = traj.midpoint(m);
        const Vector& p = traj.pressure[m - 1];
        // Per step: I_dt * (1/2|w|^2, psi) + I * [nu (1/2|w|^2, lap psi)
        //   + ((1/2|w|^2 + p) w, grad psi) - nu (|grad w|^2, psi)].
        struct Parts {
            double kinetic = 0.0, bulk = 0.0;
        };
        std::vector<Parts> parts(ne);
        parallel_for(ne, [&](std::size_t e) {
            Parts acc;
            for (std::size_t q = 0; q < nq; ++q) {
                const std::size_t i = e * nq + q;
                const double jw = spaces.jxw(e, q);
                const Vec3 wq = spaces.velocity_value(w, e, q);
                const double ke = 0.5 * wq.squaredNorm();
                const double pq = spaces.pressure_value(p, e, q);
                const double gw = spaces.velocity_gradient(w, e, q).squaredNorm();
                acc.kinetic += jw * ke * psi[i];
                acc.bulk += jw * (nu * ke * lap[i] + (ke + pq) * wq.dot(grad[i]) - nu * gw * psi[i]);
            }
            parts[e] = acc;
        });
        double kinetic = 0.0, bulk = 0.0;
        for (const auto& pe : parts) {
            kinetic += pe.kinetic;
            bulk += pe.bulk;
        }
        total += deta_int * kinetic + eta_int * bulk;
    }
    return total;
}

CnabMonitor cnab_monitor(const DiscreteTrajectory& traj, const FESpaces& spaces, double c1) {
    if (!(c1 > 0.0)) throw std::invalid_argument("cnab_monitor: c1 must be positive");
    CnabMonitor out;
    const double factor = 1.0 + traj.dt() / (2.0 * c1 * c1);
    constexpr double kSlack = 1e-12;
    for (int m = 0; m <= traj.steps(); ++m) out.max_u_sq = std::max(out.max_u_sq, spaces.velocity_l2_sq(traj.velocity[m]));
    for (int m = 1; m <= traj.steps(); ++m) {
        const double inc = spaces.velocity_l2_sq(traj.velocity[m] - traj.velocity[m - 1]);
        out.increment_sum += inc;
        out.xi.push_back(spaces.velocity_l2_sq(traj.velocity[m]) + 0.25 * inc);
        if (m >= 2) {
            const double cur = out.xi[m - 1], prev = out.xi[m - 2];
            const double tol = kSlack * std::abs(prev);
            if (cur > prev + tol) out.nonincreasing = false;
            if (factor * cur > prev + tol && out.recursion_ok) {
                out.recursion_ok = false;
                out.first_violation = m;
            }
        }
    }
    if (!traj.completed) {
        // A run that broke down counts as a violation at the failed step.
        out.nonincreasing = false;
        if (out.recursion_ok) out.first_violation = traj.steps() + 1;
        out.recursion_ok = false;
    }
    out.increment_bound_ok = out.increment_sum <= 32.0 * out.max_u_sq;
    return out;
}

FirstStepCheck cnab_first_step_check(const DiscreteTrajectory& traj, const FESpaces& spaces) {
    FirstStepCheck out;
    if (traj.steps() < 1) return out;
    const double nu_dt = traj.config.nu * traj.dt();
    const Vector& u1 = traj.velocity[1];
    out.lhs = 0.5 * spaces.velocity_l2_sq(u1) + 0.25 * nu_dt * spaces.velocity_grad_l2_sq(u1);
    out.rhs = (0.5 + nu_dt / (4.0 * traj.h * traj.h)) * spaces.velocity_l2_sq(traj.velocity[0]);
    return out;
}

DiagnosticsReport compute_report(const DiscreteTrajectory& traj, const FESpaces& spaces,
                                 const DiagnosticsOptions& options) {
    DiagnosticsReport r;
    const SchemeConfig& c = traj.config;
    r.scheme = to_string(c.scheme);
    r.convective_case = to_int(c.convective);
    r.n_cells = traj.n_cells;
    r.h = traj.h;
    r.dt = traj.dt();
    r.nu = c.nu;
    r.T = c.T;
    r.N = traj.steps();

    r.energy_residuals = energy_residuals(traj, spaces);
    for (int m = 1; m <= traj.steps(); ++m) {
        const double scale = std::max(1.0, spaces.velocity_l2_sq(traj.velocity[m - 1]));
        r.max_scaled_energy_residual = std::max(r.max_scaled_energy_residual, std::abs(r.energy_residuals[m - 1]) / scale);
    }
    r.global_energy_defect = global_energy_defect(traj, spaces);
    r.strong_energy_defect = strong_energy_defect(traj, spaces);

    const InterpolantSet interp(traj, spaces);
    r.increment_sum = interp.increment_sum();
    r.increment_normalized = r.increment_sum / (r.dt + 1.0 / std::sqrt(r.h));
    r.u0_l2 = spaces.velocity_l2(traj.velocity.front());
    r.u0_h1 = spaces.velocity_h1(traj.velocity.front());
    r.gap_l2 = interp.gap_l2();
    const double expected = r.dt / 12.0 * r.increment_sum;
    r.gap_identity_error = std::abs(r.gap_l2 - expected) / std::max(std::abs(r.gap_l2), std::numeric_limits<double>::min());
    if (r.gap_l2 == 0.0 && expected == 0.0) r.gap_identity_error = 0.0;

    r.pressure_ratios = pressure_ratios(traj, spaces);
    for (double v : r.pressure_ratios) r.max_pressure_ratio = std::max(r.max_pressure_ratio, v);

    if (options.local_energy) {
        r.min_local_energy_residual = std::numeric_limits<double>::infinity();
        for (const auto& phi : local_energy_test_family(c.T)) {
            r.local_energy_names.push_back(phi.name);
            r.local_energy_residuals.push_back(local_energy_residual(traj, spaces, phi));
            r.min_local_energy_residual = std::min(r.min_local_energy_residual, r.local_energy_residuals.back());
        }
    }

    r.divergence_ratios = divergence_ratios(traj, spaces);
    for (double v : r.divergence_ratios) r.max_divergence_ratio = std::max(r.max_divergence_ratio, v);
    r.picard_iterations = traj.picard_iterations;
    r.scheme_residuals = traj.scheme_residuals;
    r.coupling = check_coupling(c, traj.h, r.u0_l2, options.cn_threshold);

    if (c.scheme == Scheme::CNAB) {
        r.has_cnab = true;
        r.cnab = cnab_monitor(traj, spaces, c.c1);
        r.first_step = cnab_first_step_check(traj, spaces);
    }
    return r;
}

void write_report_tsv(const DiagnosticsReport& r, std::ostream& os) {
    os << std::setprecision(17);
    auto line = [&os](const char* name, auto value) { os << name << '\t' << value << '\n'; };
    line("scheme", r.scheme);
    line("convective_case", r.convective_case);
    line("n_cells", r.n_cells);
    line("h", r.h);
    line("dt", r.dt);
    line("nu", r.nu);
    line("T", r.T);
    line("N", r.N);
    line("max_scaled_energy_residual", r.max_scaled_energy_residual);
    line("global_energy_defect", r.global_energy_defect);
    line("strong_energy_defect", r.strong_energy_defect);
    line("increment_sum", r.increment_sum);
    line("increment_normalized", r.increment_normalized);
    line("u0_l2", r.u0_l2);
    line("u0_h1", r.u0_h1);
    line("gap_l2", r.gap_l2);
    line("gap_identity_error", r.gap_identity_error);
    line("max_pressure_ratio", r.max_pressure_ratio);
    if (!r.local_energy_residuals.empty()) line("min_local_energy_residual", r.min_local_energy_residual);
    line("max_divergence_ratio", r.max_divergence_ratio);
    line("cn_ratio", r.coupling.cn_ratio);
    line("cn_ok", r.coupling.cn_ok);
    line("cnle_bound", r.coupling.cnle_bound);
    line("cnle_ok", r.coupling.cnle_ok);
    line("cnab_bound", r.coupling.cnab_bound);
    line("cnab_ok", r.coupling.cnab_ok);
    line("cnab_dt_over_h3", r.coupling.cnab_dt_over_h3);
    if (r.has_cnab) {
        line("cnab_xi_recursion_ok", r.cnab.recursion_ok);
        line("cnab_xi_first_violation", r.cnab.first_violation);
        line("cnab_xi_nonincreasing", r.cnab.nonincreasing);
        line("cnab_max_u_sq", r.cnab.max_u_sq);
        line("cnab_increment_bound_ok", r.cnab.increment_bound_ok);
        line("cnab_first_step_lhs", r.first_step.lhs);
        line("cnab_first_step_rhs", r.first_step.rhs);
        line("cnab_first_step_defect", r.first_step.defect());
    }
}

void write_report_json(const DiagnosticsReport& r, std::ostream& os) {
    using nlohmann::json;
    json j;
    j["scheme"] = r.scheme;
    j["convective_case"] = r.convective_case;
    j["n_cells"] = r.n_cells;
    j["h"] = r.h;
    j["dt"] = r.dt;
    j["nu"] = r.nu;
    j["T"] = r.T;
    j["N"] = r.N;
    j["energy_residuals"] = r.energy_residuals;
    j["max_scaled_energy_residual"] = r.max_scaled_energy_residual;
    j["global_energy_defect"] = r.global_energy_defect;
    j["strong_energy_defect"] = r.strong_energy_defect;
    j["increment_sum"] = r.increment_sum;
    j["increment_normalized"] = r.increment_normalized;
    j["u0_l2"] = r.u0_l2;
    j["u0_h1"] = r.u0_h1;
    j["gap_l2"] = r.gap_l2;
    j["gap_identity_error"] = r.gap_identity_error;
    std::vector<double> pr;
    for (double v : r.pressure_ratios) pr.push_back(finite_or_zero(v));
    j["pressure_ratios"] = pr;
    j["max_pressure_ratio"] = finite_or_zero(r.max_pressure_ratio);
    json le = json::object();
    for (std::size_t i = 0; i < r.local_energy_residuals.size(); ++i)
        le[r.local_energy_names[i]] = r.local_energy_residuals[i];
    j["local_energy_residuals"] = le;
    if (!r.local_energy_residuals.empty()) j["min_local_energy_residual"] = r.min_local_energy_residual;
    j["divergence_ratios"] = r.divergence_ratios;
    j["max_divergence_ratio"] = r.max_divergence_ratio;
    j["picard_iterations"] = r.picard_iterations;
    j["scheme_residuals"] = r.scheme_residuals;
    j["coupling"] = {{"cn_ratio", r.coupling.cn_ratio},
                     {"cn_threshold", r.coupling.cn_threshold},
                     {"cn_ok", r.coupling.cn_ok},
                     {"cnle_bound", r.coupling.cnle_bound},
                     {"cnle_ok", r.coupling.cnle_ok},
                     {"cnab_bound", r.coupling.cnab_bound},
                     {"cnab_ok", r.coupling.cnab_ok},
                     {"cnab_dt_over_h3", r.coupling.cnab_dt_over_h3}};
    if (r.has_cnab) {
        j["cnab"] = {{"xi", r.cnab.xi},
                     {"recursion_ok", r.cnab.recursion_ok},
                     {"first_violation", r.cnab.first_violation},
                     {"nonincreasing", r.cnab.nonincreasing},
                     {"max_u_sq", r.cnab.max_u_sq},
                     {"increment_sum", r.cnab.increment_sum},
                     {"increment_bound_ok", r.cnab.increment_bound_ok},
                     {"first_step_lhs", r.first_step.lhs},
                     {"first_step_rhs", r.first_step.rhs}};
    }
    os << std::setw(2) << j << '\n';
}

}  // namespace tns
