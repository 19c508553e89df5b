#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "oracle.hpp"
#include "tns/diagnostics.hpp"
#include "tns/fields.hpp"

using namespace tns;

namespace {

struct Level {
    std::shared_ptr<const PeriodicMesh> mesh;
    FESpaces spaces;
    AssembledOperators ops;
    explicit Level(int n)
        : mesh(std::make_shared<const PeriodicMesh>(build_torus_mesh(n))), spaces(mesh), ops(assemble_operators(spaces)) {}
};

DiscreteTrajectory synthetic(const FESpaces& s, const std::vector<Vector>& u, double T, double nu = 0.1) {
    DiscreteTrajectory t;
    t.config.T = T;
    t.config.N = static_cast<int>(u.size()) - 1;
    t.config.nu = nu;
    t.n_cells = s.mesh().n_cells;
    t.h = s.h();
    for (int m = 0; m <= t.config.N; ++m) t.times.push_back(m == t.config.N ? T : m * t.config.dt());
    t.velocity = u;
    for (int m = 1; m <= t.config.N; ++m) t.pressure.push_back(Vector::Zero(s.pressure_dim()));
    return t;
}

double bump(double a, double b, double t) {
    if (t <= a || t >= b) return 0.0;
    const double half = 0.5 * (b - a);
    return std::pow((t - a) * (b - t) / (half * half), 2);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    const double hstep = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * hstep);
    return s * hstep / 3.0;
}

}  // namespace

TEST_CASE("zero trajectory gives zero diagnostics") {
    Level L(2);
    const Vector z = Vector::Zero(L.spaces.velocity_dim());
    const DiscreteTrajectory t = synthetic(L.spaces, {z, z, z}, 1.0);
    for (double r : energy_residuals(t, L.spaces)) CHECK(r == 0.0);
    CHECK(global_energy_defect(t, L.spaces) == 0.0);
    CHECK(strong_energy_defect(t, L.spaces) == 0.0);
    for (double r : pressure_ratios(t, L.spaces)) CHECK(r == 0.0);
    for (double r : divergence_ratios(t, L.spaces)) CHECK(r == 0.0);
    for (const auto& phi : local_energy_test_family(1.0)) CHECK(local_energy_residual(t, L.spaces, phi) == 0.0);
    const CnabMonitor mon = cnab_monitor(t, L.spaces, 1.0);
    CHECK(mon.recursion_ok);
    for (double x : mon.xi) CHECK(x == 0.0);
    CHECK(cnab_first_step_check(t, L.spaces).defect() == 0.0);
}

TEST_CASE("time bumps and the test family") {
    const TimeBump b{0.25, 0.75};
    CHECK(b(0.5) == doctest::Approx(1.0));
    CHECK(b(0.1) == 0.0);
    CHECK(b(0.3) == doctest::Approx(bump(0.25, 0.75, 0.3)).epsilon(1e-14));
    const double fd = (b(0.4 + 1e-6) - b(0.4 - 1e-6)) / 2e-6;
    CHECK(b.derivative(0.4) == doctest::Approx(fd).epsilon(1e-7));
    const auto family = local_energy_test_family(2.0);
    CHECK(family.size() == 12);
    Level L(2);
    for (const auto& f : family)
        for (std::size_t e = 0; e < L.spaces.num_elements(); ++e)
            for (std::size_t q = 0; q < L.spaces.num_qp(); ++q) CHECK(f.psi(L.spaces.point(e, q)) >= 0.0);
}

TEST_CASE("local energy residual of a space-constant test reduces to the weighted global balance") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg;
    cfg.N = 5;
    const DiscreteTrajectory t = run(cfg, L.spaces, L.ops, u0);
    const SpaceTimeTest phi{"const", TrigPoly::constant(1.0), TimeBump{0.1, 0.9}};
    double expected = 0.0;
    for (int m = 1; m <= t.steps(); ++m) {
        const double a = std::max(t.times[m - 1], 0.1), b = std::min(t.times[m], 0.9);
        if (b <= a) continue;
        const Vector w = t.midpoint(m);
        const double eta_int = simpson([](double s) { return bump(0.1, 0.9, s); }, a, b);
        expected += 0.5 * L.spaces.velocity_l2_sq(w) * (bump(0.1, 0.9, b) - bump(0.1, 0.9, a)) -
                    cfg.nu * L.spaces.velocity_grad_l2_sq(w) * eta_int;
    }
    CHECK(local_energy_residual(t, L.spaces, phi) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("local energy residual matches an oracle for a varying weight") {
    Level L(2);
    const oracle::Evaluator ev(*L.mesh);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg;
    cfg.N = 2;
    const DiscreteTrajectory t = run(cfg, L.spaces, L.ops, u0);
    const TrigPoly psi = TrigPoly::constant(1.0) + TrigPoly::term(0.5, {1, 0, 0}, {"cos", "cos", "cos"});
    const SpaceTimeTest phi{"x", psi, TimeBump{0.125, 0.875}};
    double expected = 0.0;
    for (int m = 1; m <= 2; ++m) {
        const double a = std::max(t.times[m - 1], 0.125), b = std::min(t.times[m], 0.875);
        const Vector w = t.midpoint(m);
        const Vector& p = t.pressure[m - 1];
        const double kinetic = ev.integrate([&](std::size_t e, const auto& l, const Vec3& x) {
            return 0.5 * ev.velocity(w, e, l).squaredNorm() * psi(x);
        });
        const double bulk = ev.integrate([&](std::size_t e, const auto& l, const Vec3& x) {
            const Vec3 wq = ev.velocity(w, e, l);
            const double ke = 0.5 * wq.squaredNorm();
            // Laplacian of 1 + cos(x) / 2 is -cos(x) / 2.
            const double lap = -0.5 * std::cos(x.x());
            const Vec3 g(-0.5 * std::sin(x.x()), 0, 0);
            return cfg.nu * ke * lap + (ke + ev.pressure(p, e, l)) * wq.dot(g) -
                   cfg.nu * ev.gradient(w, e, l).squaredNorm() * psi(x);
        });
        expected += kinetic * (bump(0.125, 0.875, b) - bump(0.125, 0.875, a)) +
                    bulk * simpson([](double s) { return bump(0.125, 0.875, s); }, a, b);
    }
    CHECK(local_energy_residual(t, L.spaces, phi) == doctest::Approx(expected).epsilon(1e-9));
    const SpaceTimeTest negative{"neg", TrigPoly::constant(-1.0), TimeBump{0.1, 0.9}};
    CHECK_THROWS_AS((void)local_energy_residual(t, L.spaces, negative), std::invalid_argument);
}

TEST_CASE("CN trajectory energy diagnostics") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg;
    cfg.N = 6;
    const DiscreteTrajectory t = run(cfg, L.spaces, L.ops, u0);
    const double scale = std::max(1.0, L.spaces.velocity_l2_sq(u0));
    const auto res = energy_residuals(t, L.spaces);
    CHECK(res.size() == 6);
    double sum = 0.0;
    for (double r : res) {
        CHECK(std::abs(r) <= 10 * cfg.picard_tol * scale);
        sum += r;
    }
    CHECK(std::abs(global_energy_defect(t, L.spaces) - sum) <= 1e-12 * scale);
    CHECK(std::abs(global_energy_defect(t, L.spaces)) <= cfg.N * 10 * cfg.picard_tol * scale);
    CHECK(strong_energy_defect(t, L.spaces) <= cfg.N * 10 * cfg.picard_tol * scale);
    for (double r : divergence_ratios(t, L.spaces)) CHECK(r <= 1e-9);
}

TEST_CASE("CNAB energy residuals are not an identity") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, random_trig(3, 2).as_fn());
    SchemeConfig cfg;
    cfg.scheme = Scheme::CNAB;
    cfg.N = 6;
    const DiscreteTrajectory t = run(cfg, L.spaces, L.ops, u0);
    const auto res = energy_residuals(t, L.spaces);
    double worst = 0.0;
    for (std::size_t m = 1; m < res.size(); ++m) worst = std::max(worst, std::abs(res[m]));
    CHECK(worst > 1e-8);
    CHECK(std::abs(res[0]) < 1e-8);
}

TEST_CASE("pressure ratios vanish for the shear datum") {
    for (int n : {2, 3}) {
        Level L(n);
        const Vector u0 = initial_state(L.spaces, L.ops, sine_shear().as_fn());
        SchemeConfig cfg;
        cfg.N = 2;
        cfg.T = 0.2;
        const auto ratios = pressure_ratios(run(cfg, L.spaces, L.ops, u0), L.spaces);
        CHECK(*std::max_element(ratios.begin(), ratios.end()) < 1e-10);
    }
}

TEST_CASE("CNAB monitor on synthetic trajectories") {
    Level L(2);
    const Vector u = L.spaces.project_velocity(tg_like().as_fn());
    std::vector<Vector> decaying, growing;
    for (int m = 0; m <= 5; ++m) {
        decaying.push_back(std::pow(0.5, m) * u);
        growing.push_back((m < 3 ? std::pow(0.5, m) : std::pow(2.0, m)) * u);
    }
    const CnabMonitor ok = cnab_monitor(synthetic(L.spaces, decaying, 1.0), L.spaces, 1.0);
    CHECK(ok.recursion_ok);
    CHECK(ok.nonincreasing);
    CHECK(ok.first_violation == -1);
    CHECK(ok.xi.size() == 5);
    const double x1 = L.spaces.velocity_l2_sq(decaying[1]) + 0.25 * L.spaces.velocity_l2_sq(decaying[1] - decaying[0]);
    CHECK(ok.xi[0] == doctest::Approx(x1).epsilon(1e-13));
    const CnabMonitor bad = cnab_monitor(synthetic(L.spaces, growing, 1.0), L.spaces, 1.0);
    CHECK_FALSE(bad.recursion_ok);
    CHECK_FALSE(bad.nonincreasing);
    CHECK(bad.first_violation == 3);

    // A slowly decaying run passes monotonicity but not the recursion when c1 is tiny.
    std::vector<Vector> slow;
    for (int m = 0; m <= 5; ++m) slow.push_back(std::pow(0.99, m) * u);
    const CnabMonitor tight = cnab_monitor(synthetic(L.spaces, slow, 1.0), L.spaces, 0.1);
    CHECK(tight.nonincreasing);
    CHECK_FALSE(tight.recursion_ok);
    CHECK(tight.first_violation == 2);

    DiscreteTrajectory broken = synthetic(L.spaces, {decaying[0], decaying[1]}, 0.4);
    broken.config.N = 4;
    broken.completed = false;
    const CnabMonitor b2 = cnab_monitor(broken, L.spaces, 1.0);
    CHECK_FALSE(b2.recursion_ok);
    CHECK(b2.first_violation == 2);
    CHECK_THROWS_AS((void)cnab_monitor(broken, L.spaces, 0.0), std::invalid_argument);
}

TEST_CASE("first-step check is quadratically homogeneous") {
    Level L(2);
    const Vector u0 = L.spaces.project_velocity(tg_like().as_fn());
    const Vector u1 = 0.9 * u0;
    const FirstStepCheck a = cnab_first_step_check(synthetic(L.spaces, {u0, u1}, 0.1), L.spaces);
    const FirstStepCheck b = cnab_first_step_check(synthetic(L.spaces, {2.0 * u0, 2.0 * u1}, 0.1), L.spaces);
    CHECK(b.lhs == doctest::Approx(4.0 * a.lhs).epsilon(1e-14));
    CHECK(b.rhs == doctest::Approx(4.0 * a.rhs).epsilon(1e-14));

    const Vector s0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg;
    cfg.scheme = Scheme::CNAB;
    cfg.N = 4;
    const FirstStepCheck run_check = cnab_first_step_check(run(cfg, L.spaces, L.ops, s0), L.spaces);
    CHECK(run_check.defect() <= 1e-10 * run_check.rhs);
}

TEST_CASE("report writers") {
    Level L(2);
    const Vector u0 = initial_state(L.spaces, L.ops, tg_like().as_fn());
    SchemeConfig cfg;
    cfg.scheme = Scheme::CNAB;
    cfg.N = 3;
    const DiagnosticsReport r = compute_report(run(cfg, L.spaces, L.ops, u0), L.spaces);
    CHECK(r.has_cnab);
    CHECK(r.energy_residuals.size() == 3);
    CHECK(r.local_energy_residuals.size() == 12);
    std::ostringstream tsv, js;
    write_report_tsv(r, tsv);
    write_report_json(r, js);
    CHECK(tsv.str().find("gap_l2\t") != std::string::npos);
    const auto doc = nlohmann::json::parse(js.str());
    CHECK(doc.contains("energy_residuals"));
}
