#include "tns/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tns {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::CN: return "CN";
        case Scheme::CNLE: return "CNLE";
        case Scheme::CNAB: return "CNAB";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    std::string u;
    for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u == "CN") return Scheme::CN;
    if (u == "CNLE") return Scheme::CNLE;
    if (u == "CNAB") return Scheme::CNAB;
    throw std::invalid_argument("unknown scheme '" + s + "' (expected CN, CNLE or CNAB)");
}

void SchemeConfig::validate() const {
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
    if (N < 1) throw std::invalid_argument("N must be at least 1");
    if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
    if (picard_max_iters < 1) throw std::invalid_argument("picard_max_iters must be at least 1");
    if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
    if (!(C_cnle > 0.0)) throw std::invalid_argument("C_cnle must be positive");
}

Stepper::Stepper(const FESpaces& spaces, const AssembledOperators& ops, SchemeConfig config)
    : spaces_(&spaces),
      ops_(&ops),
      config_(config),
      form_(spaces, config.convective),
      work_solver_(spaces, ops),
      fixed_solver_(spaces, ops) {
    config_.validate();
    base_ = base_matrix();
}

SpMat Stepper::base_matrix() const {
    SpMat F = (2.0 / config_.dt()) * ops_->mass + config_.nu * ops_->stiffness;
    F.makeCompressed();
    return F;
}

Vector Stepper::residual(const Vector& u_prev, const Vector& w, const Vector& p, const Vector& a,
                         const Vector& explicit_term) const {
    Vector r = (2.0 / config_.dt()) * (ops_->mass * (w - u_prev)) + config_.nu * (ops_->stiffness * w) -
               ops_->divergence.transpose() * p;
    if (a.size() > 0) r += form_.apply(a, w);
    if (explicit_term.size() > 0) r += explicit_term;
    // Test functions live in the zero-mean space: drop the part of r spanned by
    // the mean rows.
    const Matrix& C = ops_->velocity_mean_rows;
    const Eigen::Matrix3d CCt = C * C.transpose();
    const Vec3 lambda = CCt.ldlt().solve(C * r);
    r -= C.transpose() * lambda;
    return r;
}

StepResult Stepper::finish(const Vector& u_prev, SaddleSolution sol, const Vector* advecting,
                           const Vector& explicit_term) const {
    StepResult out;
    out.linear_residual = sol.residual;
    const Vector& w = sol.velocity;
    out.scheme_residual = residual(u_prev, w, sol.pressure, advecting ? *advecting : Vector(), explicit_term).norm();
    out.u = 2.0 * w - u_prev;
    out.p = std::move(sol.pressure);
    return out;
}

StepResult Stepper::solve_linear(const Vector& u_prev, const Vector* advecting, const Vector& explicit_term,
                                 SaddleSolver& solver, bool refactor) {
    if (refactor) {
        if (advecting) {
            const SpMat F = base_ + form_.frozen_matrix(*advecting);
            if (config_.convective == ConvectiveCase::RotationalBernoulli) {
                const SpMat G = form_.bernoulli_coupling(*advecting);
                solver.factorize(F, &G);
            } else {
                solver.factorize(F);
            }
        } else {
            solver.factorize(base_);
        }
    }
    Vector f = (2.0 / config_.dt()) * (ops_->mass * u_prev);
    if (explicit_term.size() > 0) f -= explicit_term;
    const Vector g = 0.5 * (ops_->divergence * u_prev);
    const Vec3 mean = 0.5 * (ops_->velocity_mean_rows * u_prev);
    return finish(u_prev, solver.solve(f, g, mean), advecting, explicit_term);
}

StepResult Stepper::step_cn(const Vector& u_prev) {
    Vector w = u_prev;
    std::vector<double> history;
    for (int it = 1; it <= config_.picard_max_iters; ++it) {
        StepResult r = solve_linear(u_prev, &w, Vector(), work_solver_, true);
        const Vector w_new = 0.5 * (r.u + u_prev);
        const double scale = std::max(spaces_->velocity_l2(w_new), 1e-300);
        const double inc = spaces_->velocity_l2(w_new - w) / scale;
        history.push_back(inc);
        if (!std::isfinite(inc)) break;
        w = w_new;
        if (inc <= config_.picard_tol) {
            // Report the residual with the converged midpoint as advecting field.
            r.scheme_residual = residual(u_prev, w, r.p, w, Vector()).norm();
            r.picard_iterations = it;
            r.increment_history = std::move(history);
            return r;
        }
    }
    std::ostringstream msg;
    msg << "CN Picard iteration did not converge in " << config_.picard_max_iters << " iterations; increments:";
    for (double v : history) msg << ' ' << v;
    throw SolverError(msg.str());
}

StepResult Stepper::step_cnle(const Vector& u_prev, const Vector& u_prev2) {
    const Vector a = 0.5 * (3.0 * u_prev - u_prev2);
    StepResult r = solve_linear(u_prev, &a, Vector(), work_solver_, true);
    r.picard_iterations = 1;
    return r;
}

StepResult Stepper::step_cnab(const Vector& u_prev, const Vector& u_prev2) {
    const Vector e = 1.5 * form_.apply(u_prev, u_prev) - 0.5 * form_.apply(u_prev2, u_prev2);
    const bool refactor = !fixed_solver_.factorized();
    StepResult r = solve_linear(u_prev, nullptr, e, fixed_solver_, refactor);
    r.picard_iterations = 1;
    return r;
}

Vector initial_state(const FESpaces& spaces, const AssembledOperators& ops, const VectorFn& u0) {
    return project_divergence_free(spaces, ops, spaces.project_velocity(u0));
}

DiscreteTrajectory run(const SchemeConfig& config, const FESpaces& spaces, const AssembledOperators& ops,
                       const Vector& u0, const RunOptions& options) {
    config.validate();
    if (u0.size() != spaces.velocity_dim()) throw std::invalid_argument("run: initial state has wrong size");
    Stepper stepper(spaces, ops, config);
    DiscreteTrajectory traj;
    traj.config = config;
    traj.n_cells = spaces.mesh().n_cells;
    traj.h = spaces.h();
    const double dt = config.dt();
    traj.times.push_back(0.0);
    traj.velocity.push_back(u0);
    for (int m = 1; m <= config.N; ++m) {
        StepResult r;
        std::string error;
        try {
            if (m == 1 || config.scheme == Scheme::CN)
                r = stepper.step_cn(traj.velocity[m - 1]);
            else if (config.scheme == Scheme::CNLE)
                r = stepper.step_cnle(traj.velocity[m - 1], traj.velocity[m - 2]);
            else
                r = stepper.step_cnab(traj.velocity[m - 1], traj.velocity[m - 2]);
            if (!r.u.allFinite() || !r.p.allFinite()) error = "non-finite solution";
        } catch (const std::exception& e) {
            error = e.what();
        }
        if (!error.empty()) {
            const std::string msg = "step " + std::to_string(m) + ": " + error;
            if (!options.keep_partial) throw SolverError(msg);
            traj.completed = false;
            traj.failure = msg;
            break;
        }
        traj.times.push_back(m == config.N ? config.T : m * dt);
        traj.velocity.push_back(std::move(r.u));
        traj.pressure.push_back(std::move(r.p));
        traj.picard_iterations.push_back(r.picard_iterations);
        traj.linear_residuals.push_back(r.linear_residual);
        traj.scheme_residuals.push_back(r.scheme_residual);
    }
    return traj;
}

CouplingFlags check_coupling(const SchemeConfig& config, double h, double u0_norm, double cn_threshold) {
    if (!(h > 0.0)) throw std::invalid_argument("check_coupling: h must be positive");
    const double dt = config.dt();
    const double nu = config.nu;
    CouplingFlags f;
    f.cn_threshold = cn_threshold;
    f.cn_ratio = dt * std::pow(u0_norm, 3) / (nu * std::sqrt(h));
    f.cn_ok = f.cn_ratio <= cn_threshold;
    const double C = config.C_cnle;
    f.cnle_bound = nu / 16.0 * std::min(h * h, h * h * h * u0_norm * u0_norm / (4.0 * C * C));
    f.cnle_ok = dt <= f.cnle_bound;
    f.cnab_bound = 4.0 * config.c1 * config.c1 / nu;
    f.cnab_ok = dt <= f.cnab_bound;
    f.cnab_dt_over_h3 = dt / (h * h * h);
    return f;
}

}  // namespace tns
