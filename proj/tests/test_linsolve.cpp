#include <doctest.h>

#include <cmath>

#include "tns/fields.hpp"
#include "tns/forms.hpp"
#include "tns/linsolve.hpp"

using namespace tns;

namespace {

struct Level {
    std::shared_ptr<const PeriodicMesh> mesh;
    FESpaces spaces;
    AssembledOperators ops;
    explicit Level(int n)
        : mesh(std::make_shared<const PeriodicMesh>(build_torus_mesh(n))), spaces(mesh), ops(assemble_operators(spaces)) {}
};

Vector zero_mean_random(const FESpaces& s, int dim, bool velocity) {
    Vector v = Vector::Random(dim);
    if (velocity)
        s.remove_velocity_mean(v);
    else
        s.remove_pressure_mean(v);
    return v;
}

}  // namespace

TEST_CASE("zero right-hand side gives the zero solution") {
    Level L(2);
    SaddleSolver solver(L.spaces, L.ops);
    CHECK_FALSE(solver.factorized());
    CHECK_THROWS_AS((void)solver.solve(Vector::Zero(L.spaces.velocity_dim()), Vector::Zero(L.spaces.pressure_dim())),
                    SolverError);
    solver.factorize(SpMat(L.ops.mass + L.ops.stiffness));
    const SaddleSolution s = solver.solve(Vector::Zero(L.spaces.velocity_dim()), Vector::Zero(L.spaces.pressure_dim()));
    CHECK(s.velocity.norm() == 0.0);
    CHECK(s.pressure.norm() == 0.0);
}

TEST_CASE("manufactured solutions are recovered") {
    Level L(3);
    const Vector u = zero_mean_random(L.spaces, L.spaces.velocity_dim(), true);
    const Vector p = zero_mean_random(L.spaces, L.spaces.pressure_dim(), false);
    const Vector a = L.spaces.project_velocity(random_trig(7, 2).as_fn());
    const SpMat Bt = L.ops.divergence.transpose();
    for (int c = 1; c <= 3; ++c) {
        const ConvectiveForm form(L.spaces, convective_case_from_int(c));
        const SpMat F = 4.0 * L.ops.mass + 0.1 * L.ops.stiffness + form.frozen_matrix(a);
        SaddleSolver solver(L.spaces, L.ops);
        Vector f = F * u - Bt * p;
        if (c == 3) {
            const SpMat G = form.bernoulli_coupling(a);
            solver.factorize(F, &G);
            f -= 0.5 * (Bt * L.spaces.solve_pressure_mass(G * u));
        } else {
            solver.factorize(F);
        }
        const SaddleSolution s = solver.solve(f, L.ops.divergence * u);
        CHECK((s.velocity - u).norm() <= 1e-10 * u.norm());
        CHECK((s.pressure - p).norm() <= 1e-10 * p.norm());
        CHECK(s.residual < 1e-12);
    }
}

TEST_CASE("prescribed velocity mean is honoured") {
    Level L(2);
    SaddleSolver solver(L.spaces, L.ops);
    solver.factorize(SpMat(L.ops.mass + L.ops.stiffness));
    const Vec3 target(1.0, -2.0, 0.5);
    const SaddleSolution s = solver.solve(Vector::Zero(L.spaces.velocity_dim()), Vector::Zero(L.spaces.pressure_dim()),
                                          target * L.spaces.volume());
    CHECK((L.spaces.velocity_mean(s.velocity) - target).norm() < 1e-12);
}

TEST_CASE("Stokes pressure of a shear datum vanishes under refinement") {
    double prev = 1e300;
    for (int n : {2, 3, 4}) {
        Level L(n);
        const Vector u0 = L.spaces.project_velocity([](const Vec3& x) { return Vec3(std::sin(x.y()), 0, 0); });
        SaddleSolver solver(L.spaces, L.ops);
        const double dt = 0.1, nu = 0.1;
        solver.factorize(SpMat((2.0 / dt) * L.ops.mass + nu * L.ops.stiffness));
        const SaddleSolution s = solver.solve((2.0 / dt) * (L.ops.mass * u0), 0.5 * (L.ops.divergence * u0));
        const double ratio = L.spaces.pressure_l2(s.pressure) / L.spaces.velocity_l2(u0);
        CHECK(ratio < prev);
        prev = ratio;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("divergence-free projection") {
    Level L(3);
    const Vector u = L.spaces.project_velocity(
        [](const Vec3& x) { return Vec3(std::cos(x.x()), std::sin(x.y()) * std::cos(x.z()), 0.3 * std::sin(x.z())); });
    const Vector pu = project_divergence_free(L.spaces, L.ops, u);
    CHECK(L.spaces.divergence_dual_norm(pu) <= 1e-12 * L.spaces.velocity_h1(pu));
    CHECK(L.spaces.velocity_mean(pu).norm() < 1e-13);
    CHECK((project_divergence_free(L.spaces, L.ops, pu) - pu).norm() <= 1e-11 * pu.norm());
    const Vector v = project_divergence_free(L.spaces, L.ops,
                                             L.spaces.project_velocity(random_trig(5, 2).as_fn()));
    CHECK(std::abs(L.spaces.velocity_dot_l2(u - pu, v)) <= 1e-11 * L.spaces.velocity_l2(u) * L.spaces.velocity_l2(v));
}
