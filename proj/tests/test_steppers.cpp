#include <doctest.h>

#include <cmath>

#include "tns/fields.hpp"
#include "tns/steppers.hpp"

using namespace tns;

namespace {

struct Level {
    std::shared_ptr<const PeriodicMesh> mesh;
    FESpaces spaces;
    AssembledOperators ops;
    explicit Level(int n)
        : mesh(std::make_shared<const PeriodicMesh>(build_torus_mesh(n))), spaces(mesh), ops(assemble_operators(spaces)) {}
};

SchemeConfig config(Scheme s, int c, double nu, double T, int N) {
    SchemeConfig cfg;
    cfg.scheme = s;
    cfg.convective = convective_case_from_int(c);
    cfg.nu = nu;
    cfg.T = T;
    cfg.N = N;
    return cfg;
}

double energy_step(const FESpaces& s, const Vector& u0, const Vector& u1, double nu, double dt) {
    return 0.5 * (s.velocity_l2_sq(u1) - s.velocity_l2_sq(u0)) + nu * dt * s.velocity_grad_l2_sq(0.5 * (u0 + u1));
}

}  // namespace

TEST_CASE("zero data stays zero") {
    Level L(2);
    const Vector z = Vector::Zero(L.spaces.velocity_dim());
    for (Scheme s : {Scheme::CN, Scheme::CNLE, Scheme::CNAB}) {
        const DiscreteTrajectory t = run(config(s, 1, 0.1, 1.0, 3), L.spaces, L.ops, z);
        CHECK(t.steps() == 3);
        for (const auto& u : t.velocity) CHECK(u.norm() == 0.0);
        for (const auto& p : t.pressure) CHECK(p.norm() == 0.0);
    }
    Stepper st(L.spaces, L.ops, config(Scheme::CNLE, 2, 0.1, 1.0, 4));
    CHECK(st.step_cnle(z, z).u.norm() == 0.0);
    CHECK(st.step_cnab(z, z).u.norm() == 0.0);
}

TEST_CASE("CN step satisfies the discrete energy equality") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, sine_shear().as_fn());
    for (int c = 1; c <= 3; ++c) {
        SchemeConfig cfg = config(Scheme::CN, c, 1.0, 0.5, 4);
        Stepper st(L.spaces, L.ops, cfg);
        const StepResult r = st.step_cn(u0);
        CHECK(r.picard_iterations >= 1);
        CHECK(L.spaces.velocity_l2_sq(r.u) < L.spaces.velocity_l2_sq(u0));
        const double res = energy_step(L.spaces, u0, r.u, cfg.nu, cfg.dt());
        CHECK(std::abs(res) <= 10 * cfg.picard_tol * std::max(1.0, L.spaces.velocity_l2_sq(u0)));
        const Vector w = 0.5 * (u0 + r.u);
        if (c < 3) CHECK(std::abs(st.form().evaluate(w, w, w)) < 1e-12 * std::pow(L.spaces.velocity_h1(w), 3));
        CHECK(r.scheme_residual < 1e-8);
    }
}

TEST_CASE("CNLE with a steady history advects with the field itself") {
    Level L(2);
    const Vector u = initial_state(L.spaces, L.ops, tg_like().as_fn());
    for (int c = 1; c <= 3; ++c) {
        SchemeConfig cfg = config(Scheme::CNLE, c, 0.1, 1.0, 8);
        Stepper st(L.spaces, L.ops, cfg);
        const StepResult r = st.step_cnle(u, u);
        const Vector w = 0.5 * (u + r.u);
        CHECK(st.residual(u, w, r.p, u, Vector()).norm() < 1e-9);
        const SpMat lhs = st.form().frozen_matrix(3.0 * u - u);
        const SpMat rhs = 2.0 * st.form().frozen_matrix(u);
        CHECK(SpMat(lhs - rhs).norm() < 1e-12 * rhs.norm());
        const double res = energy_step(L.spaces, u, r.u, cfg.nu, cfg.dt());
        CHECK(std::abs(res) < 1e-11 * L.spaces.velocity_l2_sq(u));
    }
}

TEST_CASE("CNAB explicit term with a steady history is b_h(u, u, .)") {
    Level L(2);
    const Vector u = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg = config(Scheme::CNAB, 1, 0.1, 1.0, 8);
    Stepper st(L.spaces, L.ops, cfg);
    const StepResult r = st.step_cnab(u, u);
    const Vector w = 0.5 * (u + r.u);
    CHECK(st.residual(u, w, r.p, Vector(), st.form().apply(u, u)).norm() < 1e-9);
}

TEST_CASE("first step of CNLE and CNAB is a CN step") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    const DiscreteTrajectory cn = run(config(Scheme::CN, 1, 0.1, 0.25, 1), L.spaces, L.ops, u0);
    const DiscreteTrajectory le = run(config(Scheme::CNLE, 1, 0.1, 0.25, 1), L.spaces, L.ops, u0);
    const DiscreteTrajectory ab = run(config(Scheme::CNAB, 1, 0.1, 0.25, 1), L.spaces, L.ops, u0);
    CHECK((cn.velocity[1] - le.velocity[1]).norm() == 0.0);
    CHECK((cn.velocity[1] - ab.velocity[1]).norm() == 0.0);
}

TEST_CASE("CN run conserves the global energy balance") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    const SchemeConfig cfg = config(Scheme::CN, 2, 0.1, 1.0, 8);
    const DiscreteTrajectory t = run(cfg, L.spaces, L.ops, u0);
    CHECK(t.completed);
    CHECK(t.times.back() == 1.0);
    double dissipated = 0.0;
    for (int m = 1; m <= t.steps(); ++m)
        dissipated += cfg.nu * cfg.dt() * L.spaces.velocity_grad_l2_sq(t.midpoint(m));
    const double defect =
        0.5 * L.spaces.velocity_l2_sq(t.velocity.back()) + dissipated - 0.5 * L.spaces.velocity_l2_sq(u0);
    CHECK(std::abs(defect) <= cfg.N * 10 * cfg.picard_tol * std::max(1.0, L.spaces.velocity_l2_sq(u0)));
}

TEST_CASE("solver failures carry the step index") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg = config(Scheme::CN, 1, 0.1, 1.0, 4);
    cfg.picard_max_iters = 1;
    try {
        (void)run(cfg, L.spaces, L.ops, u0);
        FAIL("expected a SolverError");
    } catch (const SolverError& e) {
        CHECK(std::string(e.what()).rfind("step 1:", 0) == 0);
    }
    RunOptions opt;
    opt.keep_partial = true;
    const DiscreteTrajectory t = run(cfg, L.spaces, L.ops, u0, opt);
    CHECK_FALSE(t.completed);
    CHECK(t.steps() == 0);
    CHECK(t.failure.rfind("step 1:", 0) == 0);
}

TEST_CASE("scheme configuration validation") {
    SchemeConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.N = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SchemeConfig{};
    cfg.nu = -1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(scheme_from_string("cnab") == Scheme::CNAB);
    CHECK_THROWS_AS((void)scheme_from_string("BDF2"), std::invalid_argument);
    CHECK(to_string(Scheme::CNLE) == "CNLE");
}

TEST_CASE("coupling flags") {
    SchemeConfig cfg;
    cfg.nu = 1.0;
    cfg.T = 0.001;
    cfg.N = 1;
    CouplingFlags f = check_coupling(cfg, 0.01, 1.0);
    CHECK(f.cn_ratio == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(f.cn_ok);
    cfg.T = 1.0;
    f = check_coupling(cfg, 0.01, 1.0);
    CHECK(f.cn_ratio == doctest::Approx(10.0).epsilon(1e-12));
    CHECK_FALSE(f.cn_ok);

    // Small C_cnle keeps the h^2 branch of the CNLE bound active.
    cfg.C_cnle = 1e-3;
    const double h = 0.5, bound = cfg.nu * h * h / 16.0;
    cfg.T = bound;
    f = check_coupling(cfg, h, 1.0);
    CHECK(f.cnle_bound == doctest::Approx(bound).epsilon(1e-14));
    CHECK(f.cnle_ok);
    cfg.T = bound * (1 + 1e-9);
    CHECK_FALSE(check_coupling(cfg, h, 1.0).cnle_ok);

    cfg.c1 = 2.0;
    cfg.nu = 0.5;
    f = check_coupling(cfg, h, 1.0);
    CHECK(f.cnab_bound == doctest::Approx(4.0 * 4.0 / 0.5).epsilon(1e-14));
    CHECK(f.cnab_dt_over_h3 == doctest::Approx(cfg.T / (h * h * h)).epsilon(1e-14));
    CHECK_THROWS_AS((void)check_coupling(cfg, 0.0, 1.0), std::invalid_argument);
}
